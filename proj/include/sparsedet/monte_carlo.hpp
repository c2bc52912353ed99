// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo estimation of false-alarm and detection probabilities for a set
// of detectors, parameter sweeps and mismatch x SINR (mesa) grids.
//
// Every trial draws from its own substream seeded by (seed, axis index, trial
// index), so results do not depend on the number of workers. Within a trial
// all detectors see the same snapshot, SCM and sparse estimate.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparsedet/detectors.hpp"
#include "sparsedet/scene.hpp"
#include "sparsedet/sparse.hpp"
#include "sparsedet/threshold.hpp"

namespace sparsedet {

struct GridSpec {
  double pointing_deg = 0.0;
  double delta_deg = 3.0;
  /// Used when n_bins is 0: widest symmetric grid inside pointing ± span.
  double half_span_deg = 48.0;
  int n_bins = 0;

  AngularGrid build() const;
};

struct InterferenceSpec {
  double rho = 0.95;
  /// Overrides rho when present.
  std::optional<CMatrix> covariance;

  InterferenceModel build(int n) const;
};

struct ExperimentConfig {
  int n_elements = 8;
  double spacing_ratio = 0.5;
  GridSpec grid;
  InterferenceSpec interference;
  int k = 32;
  double sinr_db = 14.0;
  double theta_t_deg = 0.0;
  double phase_rad = 0.0;
  std::vector<DetectorId> detectors;
  double nominal_pfa = 1e-3;
  /// 0 selects default_trials() for the hypothesis.
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  SlimConfig slim;
  int workers = 1;
  /// Per-detector thresholds that bypass calibration.
  std::map<DetectorId, double> explicit_thresholds;

  void validate() const;
  ArrayGeometry geometry() const { return ArrayGeometry(n_elements, spacing_ratio); }
  NullScene null_scene() const;
};

/// ceil(1000 / pfa) under H0, 10^4 under H1.
std::int64_t default_trials(Hypothesis hypothesis, double nominal_pfa);

/// 1.96 sqrt(p (1 - p) / trials).
double binomial_halfwidth(double p, std::int64_t trials);

using ThresholdMap = std::map<DetectorId, double>;

/// Threshold each requested detector compares against: explicit values first,
/// otherwise its companion's calibrated threshold. SAD maps to 0 (unused).
ThresholdMap resolve_thresholds(const ExperimentConfig& config, ThresholdResolver& resolver);

struct AxisValue {
  std::string name;
  double value = 0.0;
};

struct ResultRow {
  std::vector<AxisValue> axes;
  DetectorId detector;
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
  std::int64_t hits = 0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

struct ResultTable {
  Hypothesis hypothesis = Hypothesis::H0;
  std::vector<ResultRow> rows;
  /// For composite rules: trials where the rule declared H1 while its
  /// companion, evaluated at the same threshold on the same data, did not.
  std::map<DetectorId, std::int64_t> implication_violations;
  /// Thresholds used, one map per sweep point.
  std::vector<ThresholdMap> thresholds;

  const ResultRow* find(DetectorId id, std::size_t point = 0) const;
};

/// Runs config.trials trials and reports the H1-decision frequency per
/// detector. Every detector in config.detectors needs an entry in thresholds
/// (SAD excepted).
ResultTable estimate_probability(Hypothesis hypothesis, const ExperimentConfig& config,
                                 const ThresholdMap& thresholds, std::uint64_t axis_index = 0);

enum class SweepAxis { K, Sinr, DeltaTheta, ThetaT, NIteration };

std::string_view axis_name(SweepAxis axis);
std::optional<SweepAxis> parse_axis(std::string_view name);
/// Copy of base with the axis coordinate set to value.
ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value);

/// One estimate_probability call per value; thresholds re-resolved per point.
ResultTable sweep(Hypothesis hypothesis, SweepAxis axis, const std::vector<double>& values,
                  const ExperimentConfig& base, ThresholdResolver& resolver);

struct MesaGrid {
  std::vector<double> theta_axis;
  std::vector<double> sinr_axis;
  /// pd[id](i, j) at theta_axis[i], sinr_axis[j].
  std::map<DetectorId, RMatrix> pd;
  ResultTable table;
};

MesaGrid mesa_grid(const std::vector<double>& theta_axis, const std::vector<double>& sinr_axis,
                   const ExperimentConfig& base, ThresholdResolver& resolver);

}  // namespace sparsedet
