// SPDX-License-Identifier: Apache-2.0
#include "sparsedet/monte_carlo.hpp"

#include <cmath>

#include "sparsedet/errors.hpp"
#include "sparsedet/parallel.hpp"

namespace sparsedet {

AngularGrid GridSpec::build() const {
  if (n_bins > 0) return AngularGrid(pointing_deg, delta_deg, n_bins);
  return AngularGrid::spanning(pointing_deg, delta_deg, half_span_deg);
}

InterferenceModel InterferenceSpec::build(int n) const {
  if (covariance) {
    if (covariance->rows() != n || covariance->cols() != n)
      throw ConfigError("explicit covariance must be " + std::to_string(n) + " x " +
                        std::to_string(n));
    return InterferenceModel(*covariance);
  }
  return exp_covariance(n, rho);
}

void ExperimentConfig::validate() const {
  if (n_elements < 2) throw ConfigError("n must be at least 2");
  if (k < n_elements) throw ConfigError("k must be at least n");
  if (!(spacing_ratio > 0.0)) throw ConfigError("spacing must be positive");
  if (!(nominal_pfa > 0.0 && nominal_pfa < 1.0)) throw ConfigError("pfa must lie in (0, 1)");
  if (detectors.empty()) throw ConfigError("detector list is empty");
  if (trials < 0) throw ConfigError("trials must be positive");
  if (!std::isfinite(sinr_db) || !std::isfinite(theta_t_deg))
    throw ConfigError("sinr and target angle must be finite");
  try {
    const AngularGrid g = grid.build();
    slim.validate(g.n_bins());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

NullScene ExperimentConfig::null_scene() const {
  return NullScene{geometry(), interference.build(n_elements), grid.pointing_deg, k};
}

std::int64_t default_trials(Hypothesis hypothesis, double nominal_pfa) {
  if (hypothesis == Hypothesis::H1) return 10000;
  return static_cast<std::int64_t>(std::ceil(1000.0 / nominal_pfa - 1e-9));
}

double binomial_halfwidth(double p, std::int64_t trials) {
  if (trials <= 0) return 0.0;
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

ThresholdMap resolve_thresholds(const ExperimentConfig& config, ThresholdResolver& resolver) {
  ThresholdMap out;
  std::optional<NullScene> scene;
  for (DetectorId id : config.detectors) {
    if (auto it = config.explicit_thresholds.find(id); it != config.explicit_thresholds.end()) {
      out[id] = it->second;
      continue;
    }
    const auto companion = threshold_companion(id);
    if (!companion) {
      out[id] = 0.0;
      continue;
    }
    if (auto it = config.explicit_thresholds.find(*companion);
        it != config.explicit_thresholds.end()) {
      out[id] = it->second;
      continue;
    }
    if (!scene) scene = config.null_scene();
    out[id] = resolver.resolve(*companion, *scene, config.nominal_pfa).value;
  }
  return out;
}

const ResultRow* ResultTable::find(DetectorId id, std::size_t point) const {
  std::size_t seen = 0;
  for (const auto& row : rows) {
    if (row.detector != id) continue;
    if (seen++ == point) return &row;
  }
  return nullptr;
}

namespace {

bool is_composite(DetectorId id) {
  return id == DetectorId::SadGlrt || id == DetectorId::SadAmf || id == DetectorId::BslimAmf ||
         id == DetectorId::BslimGlrt;
}

struct WorkerCounts {
  std::vector<std::int64_t> hits;
  std::vector<std::int64_t> violations;
};

}  // namespace

ResultTable estimate_probability(Hypothesis hypothesis, const ExperimentConfig& config,
                                 const ThresholdMap& thresholds, std::uint64_t axis_index) {
  config.validate();
  const std::size_t n_det = config.detectors.size();
  std::vector<double> thr(n_det, 0.0);
  bool need_sparse = false;
  for (std::size_t d = 0; d < n_det; ++d) {
    const DetectorId id = config.detectors[d];
    need_sparse = need_sparse || uses_sparse_estimate(id);
    if (id == DetectorId::Sad) continue;
    auto it = thresholds.find(id);
    if (it == thresholds.end())
      throw ConfigError("no threshold for detector " + std::string(detector_name(id)));
    thr[d] = it->second;
  }

  const ArrayGeometry geometry = config.geometry();
  const Dictionary dict(geometry, config.grid.build());
  const InterferenceModel model = config.interference.build(config.n_elements);
  const CVector v = dict.column(dict.nominal_index());
  const int m = dict.nominal_index();
  CVector target = CVector::Zero(config.n_elements);
  if (hypothesis == Hypothesis::H1) {
    const TargetScenario scenario{config.sinr_db, config.theta_t_deg, config.phase_rad};
    target = amplitude_for_sinr(scenario, model, geometry) *
             steering_vector(geometry, config.theta_t_deg);
  }

  const std::int64_t n_trials =
      config.trials > 0 ? config.trials : default_trials(hypothesis, config.nominal_pfa);
  const int n_workers = resolve_workers(config.workers);
  std::vector<WorkerCounts> counts(static_cast<std::size_t>(n_workers),
                                   WorkerCounts{std::vector<std::int64_t>(n_det, 0),
                                                std::vector<std::int64_t>(n_det, 0)});

  parallel_chunks(
      n_trials, n_workers,
      [&](int worker, std::int64_t begin, std::int64_t end) {
        WorkerCounts& c = counts[static_cast<std::size_t>(worker)];
        for (std::int64_t t = begin; t < end; ++t) {
          RngStream rng(config.seed, axis_index, static_cast<std::uint64_t>(t));
          const Trial trial = synthesize_trial(hypothesis, target, model, config.k, rng);
          const ScmEstimate scm(trial.training);
          const WhitenedCell cell = whiten_cell(trial.snapshot.z, scm, v);
          std::optional<SparseEstimate> estimate;
          if (need_sparse) estimate = bslim(trial.snapshot.z, dict, scm, config.slim);
          const SparseEstimate* est = estimate ? &*estimate : nullptr;
          for (std::size_t d = 0; d < n_det; ++d) {
            const DetectorId id = config.detectors[d];
            const DetectorOutcome out = evaluate_detector(id, cell, est, m, thr[d]);
            if (!out.decision) continue;
            ++c.hits[d];
            if (is_composite(id)) {
              const double companion = *threshold_companion(id) == DetectorId::Kelly
                                           ? kelly_statistic(cell.forms)
                                           : amf_statistic(cell.forms);
              if (!(companion > thr[d])) ++c.violations[d];
            }
          }
        }
      },
      256);

  ResultTable table;
  table.hypothesis = hypothesis;
  table.thresholds.push_back(thresholds);
  for (std::size_t d = 0; d < n_det; ++d) {
    std::int64_t hits = 0;
    std::int64_t violations = 0;
    for (const auto& c : counts) {
      hits += c.hits[d];
      violations += c.violations[d];
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n_trials);
    const DetectorId id = config.detectors[d];
    table.rows.push_back(
        ResultRow{{}, id, p, binomial_halfwidth(p, n_trials), hits, n_trials, config.seed});
    if (is_composite(id)) table.implication_violations[id] += violations;
  }
  return table;
}

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::K:
      return "k";
    case SweepAxis::Sinr:
      return "sinr_db";
    case SweepAxis::DeltaTheta:
      return "delta_theta_deg";
    case SweepAxis::ThetaT:
      return "theta_t_deg";
    case SweepAxis::NIteration:
      return "n_iterations";
  }
  return "unknown";
}

std::optional<SweepAxis> parse_axis(std::string_view name) {
  for (SweepAxis axis : {SweepAxis::K, SweepAxis::Sinr, SweepAxis::DeltaTheta, SweepAxis::ThetaT,
                         SweepAxis::NIteration})
    if (axis_name(axis) == name) return axis;
  if (name == "sinr") return SweepAxis::Sinr;
  if (name == "delta-theta" || name == "delta_theta") return SweepAxis::DeltaTheta;
  if (name == "theta-t" || name == "theta_t") return SweepAxis::ThetaT;
  if (name == "n-iter" || name == "n_iter" || name == "n-iterations") return SweepAxis::NIteration;
  return std::nullopt;
}

ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig c = base;
  auto as_int = [&](const char* what) {
    const double r = std::round(value);
    if (std::abs(r - value) > 1e-9) throw ConfigError(std::string(what) + " must be an integer");
    return static_cast<int>(r);
  };
  switch (axis) {
    case SweepAxis::K:
      c.k = as_int("k");
      break;
    case SweepAxis::Sinr:
      c.sinr_db = value;
      break;
    case SweepAxis::DeltaTheta:
      c.grid.delta_deg = value;
      break;
    case SweepAxis::ThetaT:
      c.theta_t_deg = value;
      break;
    case SweepAxis::NIteration:
      c.slim.n_iterations = as_int("n_iterations");
      break;
  }
  return c;
}

ResultTable sweep(Hypothesis hypothesis, SweepAxis axis, const std::vector<double>& values,
                  const ExperimentConfig& base, ThresholdResolver& resolver) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  ResultTable out;
  out.hypothesis = hypothesis;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const ExperimentConfig config = with_axis_value(base, axis, values[i]);
    config.validate();
    const ThresholdMap thresholds = resolve_thresholds(config, resolver);
    ResultTable point = estimate_probability(hypothesis, config, thresholds, i);
    for (auto& row : point.rows) {
      row.axes.push_back({std::string(axis_name(axis)), values[i]});
      out.rows.push_back(std::move(row));
    }
    for (const auto& [id, n] : point.implication_violations) out.implication_violations[id] += n;
    out.thresholds.push_back(thresholds);
  }
  return out;
}

MesaGrid mesa_grid(const std::vector<double>& theta_axis, const std::vector<double>& sinr_axis,
                   const ExperimentConfig& base, ThresholdResolver& resolver) {
  if (theta_axis.empty() || sinr_axis.empty()) throw ConfigError("mesa axes must be nonempty");
  base.validate();
  MesaGrid grid;
  grid.theta_axis = theta_axis;
  grid.sinr_axis = sinr_axis;
  grid.table.hypothesis = Hypothesis::H1;
  const auto rows = static_cast<Eigen::Index>(theta_axis.size());
  const auto cols = static_cast<Eigen::Index>(sinr_axis.size());
  for (DetectorId id : base.detectors) grid.pd[id] = RMatrix::Zero(rows, cols);

  // Neither axis changes the null distribution, so one threshold set serves the grid.
  const ThresholdMap thresholds = resolve_thresholds(base, resolver);
  grid.table.thresholds.push_back(thresholds);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      ExperimentConfig config = base;
      config.theta_t_deg = theta_axis[static_cast<std::size_t>(i)];
      config.sinr_db = sinr_axis[static_cast<std::size_t>(j)];
      const auto index = static_cast<std::uint64_t>(i * cols + j);
      ResultTable cell = estimate_probability(Hypothesis::H1, config, thresholds, index);
      for (auto& row : cell.rows) {
        grid.pd[row.detector](i, j) = row.estimate;
        row.axes = {{"theta_t_deg", config.theta_t_deg}, {"sinr_db", config.sinr_db}};
        grid.table.rows.push_back(std::move(row));
      }
      for (const auto& [id, n] : cell.implication_violations)
        grid.table.implication_violations[id] += n;
    }
  }
  return grid;
}

}  // namespace sparsedet
