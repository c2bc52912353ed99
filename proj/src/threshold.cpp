// SPDX-License-Identifier: Apache-2.0
#include "sparsedet/threshold.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "json.hpp"
#include "sparsedet/errors.hpp"
#include "sparsedet/parallel.hpp"

namespace sparsedet {

namespace {

void check_sizes(int n, int k) {
  if (n < 1) throw DomainError("array size must be positive");
  if (k < n) throw DomainError("training size must be at least the array size");
}

}  // namespace

double kelly_threshold(double pfa, int n, int k) {
  if (!(pfa > 0.0 && pfa <= 1.0)) throw DomainError("pfa must lie in (0, 1]");
  check_sizes(n, k);
  return 1.0 - std::pow(pfa, 1.0 / (k - n + 1));
}

double beta_pdf(double x, int n, int m) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("beta argument outside [0, 1]");
  if (n < 1 || m < 1) throw DomainError("beta parameters must be at least 1");
  double log_pdf = std::lgamma(static_cast<double>(n + m)) - std::lgamma(static_cast<double>(n)) -
                   std::lgamma(static_cast<double>(m));
  if (n > 1) log_pdf += (n - 1) * std::log(x);
  if (m > 1) log_pdf += (m - 1) * std::log1p(-x);
  return std::exp(log_pdf);
}

double amf_pfa_of_threshold(double eta, int n, int k) {
  if (n < 2) throw DomainError("AMF false-alarm integral needs N >= 2");
  check_sizes(n, k);
  if (!(eta >= 0.0) || std::isnan(eta)) throw DomainError("threshold must be non-negative");
  if (std::isinf(eta)) return 0.0;
  const int l = k - n + 1;
  auto integrand = [&](double rho) {
    return beta_pdf(rho, l + 1, n - 1) * std::exp(-l * std::log1p(eta * rho / k));
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, 1.0, 15, 1e-12, &error);
  if (error > 1e-10) throw NumericError("AMF false-alarm quadrature did not converge");
  return std::clamp(value, 0.0, 1.0);
}

double amf_threshold(double pfa, int n, int k) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw CalibrationError("AMF calibration needs pfa in (0, 1)");
  const double log_target = std::log(pfa);
  auto f = [&](double eta) { return std::log(amf_pfa_of_threshold(eta, n, k)) - log_target; };

  double lo = 0.0;
  double hi = 1.0;
  double f_lo = f(lo);
  double f_hi = f(hi);
  while (f_hi > 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    if (hi > 1e12) throw CalibrationError("AMF threshold is not bracketable for this pfa");
    const double p = amf_pfa_of_threshold(hi, n, k);
    if (p <= 0.0) throw CalibrationError("AMF threshold is not bracketable for this pfa");
    f_hi = std::log(p) - log_target;
  }
  if (f_hi == 0.0) return hi;

  boost::uintmax_t max_iter = 200;
  const auto root = boost::math::tools::toms748_solve(
      f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(44), max_iter);
  return 0.5 * (root.first + root.second);
}

std::vector<double> null_statistics(DetectorId id, const NullScene& scene, std::int64_t n_trials,
                                    std::uint64_t seed, int workers) {
  switch (id) {
    case DetectorId::Kelly:
    case DetectorId::Amf:
    case DetectorId::Rao:
    case DetectorId::WAbort:
    case DetectorId::Ace:
      break;
    default:
      throw CalibrationError(std::string(detector_name(id)) +
                             " is calibrated through its companion detector");
  }
  if (scene.model.size() != scene.geometry.n_elements())
    throw DomainError("covariance and array sizes differ");
  check_sizes(scene.geometry.n_elements(), scene.k);

  const CVector v = steering_vector(scene.geometry, scene.pointing_deg);
  const CVector no_signal = CVector::Zero(v.size());
  std::vector<double> stats(static_cast<std::size_t>(std::max<std::int64_t>(n_trials, 0)));
  parallel_chunks(n_trials, workers, [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t t = begin; t < end; ++t) {
      RngStream rng(seed, 0, static_cast<std::uint64_t>(t));
      const Trial trial = synthesize_trial(Hypothesis::H0, no_signal, scene.model, scene.k, rng);
      const ScmEstimate scm(trial.training);
      const WhitenedCell cell = whiten_cell(trial.snapshot.z, scm, v);
      stats[static_cast<std::size_t>(t)] = *detector_statistic(id, cell, nullptr, 0);
    }
  });
  return stats;
}

MonteCarloThreshold threshold_from_samples(std::vector<double>& samples, double pfa) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw CalibrationError("Monte Carlo calibration needs pfa in (0, 1)");
  if (samples.empty()) throw CalibrationError("no null statistics to rank");
  const auto n = static_cast<std::int64_t>(samples.size());
  std::sort(samples.begin(), samples.end());

  auto at_rank = [&](double rank) {
    const auto r = std::clamp<std::int64_t>(static_cast<std::int64_t>(rank), 1, n);
    return samples[static_cast<std::size_t>(r - 1)];
  };
  const double centre = std::ceil(static_cast<double>(n) * (1.0 - pfa) - 1e-9);
  const double spread = 1.96 * std::sqrt(static_cast<double>(n) * pfa * (1.0 - pfa));

  MonteCarloThreshold out;
  out.value = at_rank(centre);
  out.ci_low = at_rank(std::floor(centre - spread));
  out.ci_high = at_rank(std::ceil(centre + spread));
  out.trials = n;
  return out;
}

MonteCarloThreshold montecarlo_threshold(DetectorId id, const NullScene& scene, double pfa,
                                         std::int64_t n_trials, std::uint64_t seed, int workers) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw CalibrationError("Monte Carlo calibration needs pfa in (0, 1)");
  if (static_cast<double>(n_trials) < 100.0 / pfa - 1e-9)
    throw CalibrationError("Monte Carlo calibration needs at least 100 / pfa trials");
  std::vector<double> stats = null_statistics(id, scene, n_trials, seed, workers);
  MonteCarloThreshold out = threshold_from_samples(stats, pfa);
  out.seed = seed;
  return out;
}

std::string_view method_name(ThresholdMethod method) {
  switch (method) {
    case ThresholdMethod::ClosedForm:
      return "closed_form";
    case ThresholdMethod::Quadrature:
      return "quadrature";
    case ThresholdMethod::MonteCarlo:
      return "monte_carlo";
  }
  return "unknown";
}

namespace {

ThresholdMethod parse_method(const std::string& name) {
  if (name == "closed_form") return ThresholdMethod::ClosedForm;
  if (name == "quadrature") return ThresholdMethod::Quadrature;
  if (name == "monte_carlo") return ThresholdMethod::MonteCarlo;
  throw ConfigError("unknown threshold method '" + name + "'");
}

class Fnv1a {
 public:
  void add(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      hash_ ^= (word >> (8 * i)) & 0xffU;
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(double x) { add(std::bit_cast<std::uint64_t>(x == 0.0 ? 0.0 : x)); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string interference_fingerprint(const NullScene& scene) {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(scene.geometry.n_elements()));
  h.add(scene.geometry.spacing_ratio());
  h.add(scene.pointing_deg);
  const CMatrix& r = scene.model.covariance();
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      h.add(r(i, j).real());
      h.add(r(i, j).imag());
    }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

ThresholdKey threshold_key(DetectorId id, const NullScene& scene, double pfa) {
  ThresholdKey key{id, scene.geometry.n_elements(), scene.k, pfa, {}};
  if (id != DetectorId::Kelly && id != DetectorId::Amf) key.fingerprint = interference_fingerprint(scene);
  return key;
}

ThresholdTable::ThresholdTable(const ThresholdTable& other) : records_(other.records()) {}

ThresholdTable& ThresholdTable::operator=(const ThresholdTable& other) {
  if (this != &other) {
    auto copy = other.records();
    std::lock_guard lock(mutex_);
    records_ = std::move(copy);
  }
  return *this;
}

std::optional<ThresholdRecord> ThresholdTable::find(const ThresholdKey& key) const {
  std::lock_guard lock(mutex_);
  for (const auto& r : records_)
    if (r.key == key) return r;
  return std::nullopt;
}

void ThresholdTable::insert(const ThresholdRecord& record) {
  if (!(record.value >= 0.0)) throw CalibrationError("thresholds must be non-negative");
  std::lock_guard lock(mutex_);
  for (auto& r : records_)
    if (r.key == record.key) {
      r = record;
      return;
    }
  records_.push_back(record);
}

std::vector<ThresholdRecord> ThresholdTable::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t ThresholdTable::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::string ThresholdTable::to_json() const {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : this->records()) {
    nlohmann::json j;
    j["detector"] = std::string(detector_name(r.key.detector));
    j["n"] = r.key.n;
    j["k"] = r.key.k;
    j["pfa"] = r.key.pfa;
    j["fingerprint"] = r.key.fingerprint;
    j["method"] = std::string(method_name(r.method));
    j["value"] = r.value;
    j["trials"] = r.trials;
    j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
    records.push_back(std::move(j));
  }
  nlohmann::json doc{{"format", "sparsedet-thresholds"}, {"version", 1}, {"records", records}};
  return doc.dump(2) + "\n";
}

ThresholdTable ThresholdTable::from_json(const std::string& text) {
  ThresholdTable table;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& j : doc.at("records")) {
      ThresholdRecord r;
      const auto name = j.at("detector").get<std::string>();
      const auto id = parse_detector(name);
      if (!id) throw ConfigError("unknown detector '" + name + "' in threshold cache");
      r.key = {*id, j.at("n").get<int>(), j.at("k").get<int>(), j.at("pfa").get<double>(),
               j.value("fingerprint", std::string{})};
      r.method = parse_method(j.at("method").get<std::string>());
      r.value = j.at("value").get<double>();
      r.trials = j.value("trials", std::int64_t{0});
      if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
      table.insert(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed threshold cache: ") + e.what());
  }
  return table;
}

ThresholdTable ThresholdTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void ThresholdTable::save(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write threshold cache " + path.string());
    out << to_json();
  }
  std::filesystem::rename(tmp, path);
}

ThresholdRecord calibrate(DetectorId id, const NullScene& scene, double pfa,
                          const CalibrationPolicy& policy) {
  ThresholdRecord record;
  record.key = threshold_key(id, scene, pfa);
  try {
    switch (id) {
      case DetectorId::Kelly:
        record.value = kelly_threshold(pfa, scene.geometry.n_elements(), scene.k);
        record.method = ThresholdMethod::ClosedForm;
        return record;
      case DetectorId::Amf:
        record.value = amf_threshold(pfa, scene.geometry.n_elements(), scene.k);
        record.method = ThresholdMethod::Quadrature;
        return record;
      default:
        break;
    }
  } catch (const DomainError& e) {
    throw CalibrationError(e.what());
  }
  const std::int64_t trials =
      policy.trials > 0 ? policy.trials : static_cast<std::int64_t>(std::ceil(1000.0 / pfa - 1e-9));
  const MonteCarloThreshold mc = montecarlo_threshold(id, scene, pfa, trials, policy.seed, policy.workers);
  record.value = mc.value;
  record.method = ThresholdMethod::MonteCarlo;
  record.trials = mc.trials;
  record.seed = policy.seed;
  return record;
}

ThresholdRecord ThresholdResolver::resolve(DetectorId id, const NullScene& scene, double pfa) {
  const ThresholdKey key = threshold_key(id, scene, pfa);
  ThresholdTable& table = cache_ != nullptr ? *cache_ : memo_;
  if (auto hit = table.find(key)) {
    ++hits_;
    return *hit;
  }
  ++misses_;
  ThresholdRecord record = calibrate(id, scene, pfa, policy_);
  table.insert(record);
  return record;
}

}  // namespace sparsedet
