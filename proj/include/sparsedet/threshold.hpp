// SPDX-License-Identifier: Apache-2.0
//
// Detection thresholds for a nominal false-alarm probability: closed form for
// Kelly's GLRT, numeric inversion of the AMF false-alarm integral, and
// Monte Carlo order statistics for the remaining statistics. Thresholds are
// cached in a JSON table.
#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sparsedet/detectors.hpp"
#include "sparsedet/scene.hpp"

namespace sparsedet {

/// 1 - pfa^(1 / (K - N + 1)).
double kelly_threshold(double pfa, int n, int k);

/// Complex central Beta density (n+m-1)!/((n-1)!(m-1)!) x^(n-1) (1-x)^(m-1).
double beta_pdf(double x, int n, int m);

/// AMF false-alarm probability at threshold eta, with L = K - N + 1:
/// integral over [0,1] of beta_pdf(rho; L+1, N-1) (1 + eta rho / K)^(-L).
double amf_pfa_of_threshold(double eta, int n, int k);

/// Inverse of amf_pfa_of_threshold in eta.
double amf_threshold(double pfa, int n, int k);

/// Null-hypothesis environment for Monte Carlo calibration.
struct NullScene {
  ArrayGeometry geometry;
  InterferenceModel model;
  double pointing_deg = 0.0;
  int k = 0;
};

struct MonteCarloThreshold {
  double value = 0.0;
  /// 95% distribution-free interval from the binomial spread of the rank.
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Statistics of id over n_trials independent null trials, a fresh SCM per
/// trial. Entry i depends only on (seed, i). id must be a classical detector.
std::vector<double> null_statistics(DetectorId id, const NullScene& scene, std::int64_t n_trials,
                                    std::uint64_t seed, int workers = 1);

/// Order statistic of rank ceil(n_trials (1 - pfa)) among null statistics.
/// Requires n_trials >= 100 / pfa.
MonteCarloThreshold montecarlo_threshold(DetectorId id, const NullScene& scene, double pfa,
                                         std::int64_t n_trials, std::uint64_t seed,
                                         int workers = 1);

/// Rank-based threshold from already generated null statistics (sorted in place).
MonteCarloThreshold threshold_from_samples(std::vector<double>& samples, double pfa);

enum class ThresholdMethod { ClosedForm, Quadrature, MonteCarlo };

std::string_view method_name(ThresholdMethod method);

/// Identifies the interference, geometry and pointing of a scene; empty for
/// detectors whose threshold is distribution-free.
std::string interference_fingerprint(const NullScene& scene);

struct ThresholdKey {
  DetectorId detector;
  int n = 0;
  int k = 0;
  double pfa = 0.0;
  std::string fingerprint;

  bool operator==(const ThresholdKey&) const = default;
};

struct ThresholdRecord {
  ThresholdKey key;
  double value = 0.0;
  ThresholdMethod method = ThresholdMethod::ClosedForm;
  std::int64_t trials = 0;
  std::optional<std::uint64_t> seed;
};

/// In-memory threshold cache with JSON persistence. Lookups and inserts are
/// serialized by an internal mutex.
class ThresholdTable {
 public:
  ThresholdTable() = default;
  ThresholdTable(const ThresholdTable& other);
  ThresholdTable& operator=(const ThresholdTable& other);

  std::optional<ThresholdRecord> find(const ThresholdKey& key) const;
  /// Inserts or replaces the record with the same key.
  void insert(const ThresholdRecord& record);
  std::vector<ThresholdRecord> records() const;
  std::size_t size() const;

  std::string to_json() const;
  static ThresholdTable from_json(const std::string& text);
  /// Missing file gives an empty table.
  static ThresholdTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  mutable std::mutex mutex_;
  std::vector<ThresholdRecord> records_;
};

struct CalibrationPolicy {
  /// Monte Carlo trial count; 0 selects ceil(1000 / pfa).
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Computes thresholds for classical detectors through the cache: closed form
/// for Kelly, quadrature for the AMF, Monte Carlo for RAO, W-ABORT and ACE.
/// Without an external cache, results are memoized for the resolver's life.
class ThresholdResolver {
 public:
  explicit ThresholdResolver(CalibrationPolicy policy, ThresholdTable* cache = nullptr)
      : policy_(policy), cache_(cache) {}

  ThresholdRecord resolve(DetectorId id, const NullScene& scene, double pfa);

  int hits() const { return hits_; }
  int misses() const { return misses_; }
  const CalibrationPolicy& policy() const { return policy_; }

 private:
  CalibrationPolicy policy_;
  ThresholdTable* cache_;
  ThresholdTable memo_;
  int hits_ = 0;
  int misses_ = 0;
};

/// Computes one record without touching any cache.
ThresholdRecord calibrate(DetectorId id, const NullScene& scene, double pfa,
                          const CalibrationPolicy& policy);

ThresholdKey threshold_key(DetectorId id, const NullScene& scene, double pfa);

}  // namespace sparsedet
