// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "sparsedet/errors.hpp"

#ifndef SPARSEDET_VERSION
#define SPARSEDET_VERSION "0.0.0"
#endif

namespace sparsedet::cli {

namespace {

constexpr const char* kDefaultCache = "sparsedet_thresholds.json";
constexpr const char* kCacheEnv = "SPARSEDET_THRESHOLD_CACHE";

struct Flag {
  const char* names;
  const char* key;
  const char* help;
};

// Experiment settings shared by every command; each maps onto a config key.
constexpr Flag kFlags[] = {
    {"--n", "n", "array elements N"},
    {"--k", "k", "training vectors K"},
    {"--rho", "rho", "one-lag interference correlation"},
    {"--spacing", "spacing", "element spacing in wavelengths"},
    {"--pointing", "pointing", "nominal pointing direction (deg)"},
    {"--delta-theta", "delta_theta", "dictionary bin spacing (deg)"},
    {"--span", "span", "dictionary half span (deg)"},
    {"--n-bins", "n_bins", "dictionary size M (odd; overrides --span)"},
    {"--pfa", "pfa", "nominal false-alarm probability"},
    {"--detectors,--det", "detectors", "comma-separated detector names"},
    {"--sinr", "sinr", "target SINR (dB)"},
    {"--theta-t", "theta_t", "true target angle (deg)"},
    {"--phase", "phase", "target phase (rad)"},
    {"--trials", "trials", "Monte Carlo trials"},
    {"--seed", "seed", "master seed"},
    {"--workers", "workers", "worker threads (0 = all cores)"},
    {"--n-iter", "n_iter", "SLIM iterations"},
    {"--q-grid", "q_grid", "comma-separated q values"},
    {"--h-max", "h_max", "largest BIC model order (0 = M)"},
    {"--hyp", "hyp", "h0 or h1 (sweep)"},
    {"--axis", "axis", "sweep axis: k, sinr_db, delta_theta, theta_t_deg, n_iterations"},
    {"--values", "values", "axis values, start:step:stop or a comma list"},
    {"--theta-values", "theta_values", "mesa target angles (deg)"},
    {"--sinr-values", "sinr_values", "mesa SINR values (dB)"},
    {"--calibration-trials", "calibration_trials", "trials for Monte Carlo thresholds"},
    {"--calibration-seed", "calibration_seed", "seed for Monte Carlo thresholds"},
};

struct Options {
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::Option*> given;
  std::vector<std::string> thresholds;
  std::string config;
  std::string figure;
  std::string out;
  std::string manifest;
  std::string cache;
};

void add_flags(CLI::App& app, Options& o) {
  for (const Flag& f : kFlags) o.given[f.key] = app.add_option(f.names, o.flags[f.key], f.help);
  app.add_option("--threshold", o.thresholds, "explicit threshold, name=value (repeatable)");
  app.add_option("--config", o.config, "JSON or TOML settings file, or a manifest to replay");
  app.add_option("--figure", o.figure, "named preset");
  app.add_option("--out", o.out, "CSV output file (default stdout)");
  app.add_option("--manifest", o.manifest, "manifest path (default <out>.manifest.json)");
  app.add_option("--cache", o.cache, "threshold cache file");
}

Json flag_settings(const Options& o) {
  Json j = Json::object();
  for (const auto& [key, option] : o.given)
    if (option->count() > 0) j[key] = o.flags.at(key);
  if (!o.thresholds.empty()) {
    Json thr = Json::object();
    for (const auto& entry : o.thresholds) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw ConfigError("--threshold expects name=value");
      thr[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    j["thresholds"] = thr;
  }
  return j;
}

Json layered_settings(const Options& o, const std::string& command) {
  Json merged = Json::object();
  if (!o.figure.empty()) {
    auto p = preset(o.figure);
    if (!p) throw ConfigError("unknown preset '" + o.figure + "'");
    if (p->contains("command") && (*p)["command"] != command)
      throw ConfigError("preset " + o.figure + " belongs to the '" +
                        (*p)["command"].get<std::string>() + "' command");
    merged = *p;
  }
  if (!o.config.empty()) merged.update(load_config_file(o.config), true);
  merged.update(flag_settings(o), true);
  merged.erase("command");
  return merged;
}

std::filesystem::path cache_path(const Options& o) {
  if (!o.cache.empty()) return o.cache;
  if (const char* env = std::getenv(kCacheEnv); env != nullptr && *env != '\0') return env;
  return kDefaultCache;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << body;
  if (!f) throw ConfigError("write failed for '" + path.string() + "'");
}

Json thresholds_json(const ThresholdMap& m) {
  Json j = Json::object();
  for (const auto& [id, value] : m) j[std::string(detector_name(id))] = value;
  return j;
}

const std::vector<DetectorId>& default_detectors() {
  static const std::vector<DetectorId> ids = {DetectorId::Kelly,   DetectorId::Amf,
                                              DetectorId::SadGlrt, DetectorId::SadAmf,
                                              DetectorId::BslimAmf, DetectorId::BslimGlrt};
  return ids;
}

int cmd_results(const std::string& command, const Options& o, std::ostream& out,
                std::ostream& err) {
  RunSpec spec = spec_from_json(layered_settings(o, command));
  if (!spec.seed_given) throw ConfigError("--seed is required for '" + command + "'");
  ExperimentConfig& config = spec.config;
  if (config.detectors.empty()) config.detectors = default_detectors();
  config.validate();

  const auto cache_file = cache_path(o);
  ThresholdTable cache = ThresholdTable::load(cache_file);
  ThresholdResolver resolver(
      CalibrationPolicy{spec.calibration_trials, spec.calibration_seed, config.workers}, &cache);

  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  ResultTable table;
  if (command == "pfa" || command == "pd") {
    spec.hypothesis = command == "pfa" ? Hypothesis::H0 : Hypothesis::H1;
    const ThresholdMap thresholds = resolve_thresholds(config, resolver);
    table = estimate_probability(spec.hypothesis, config, thresholds);
  } else if (command == "sweep") {
    if (!spec.axis) throw ConfigError("sweep needs --axis");
    if (spec.values.empty()) throw ConfigError("sweep needs --values");
    table = sweep(spec.hypothesis, *spec.axis, spec.values, config, resolver);
  } else {
    if (spec.theta_values.empty() || spec.sinr_values.empty())
      throw ConfigError("mesa needs --theta-values and --sinr-values");
    spec.hypothesis = Hypothesis::H1;
    table = mesa_grid(spec.theta_values, spec.sinr_values, config, resolver).table;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (resolver.misses() > 0) cache.save(cache_file);

  // Pin what was resolved so a replay does not depend on the cache or defaults.
  if (!table.rows.empty()) config.trials = table.rows.front().trials;
  bool uniform = true;
  for (const auto& m : table.thresholds) uniform = uniform && m == table.thresholds.front();
  if (uniform && !table.thresholds.empty())
    for (const auto& [id, value] : table.thresholds.front()) config.explicit_thresholds[id] = value;

  Json violations = Json::object();
  for (const auto& [id, n] : table.implication_violations) {
    violations[std::string(detector_name(id))] = n;
    if (n > 0)
      err << "warning: " << detector_name(id) << " declared H1 on " << n
          << " trials where its companion did not\n";
  }
  Json used = Json::array();
  for (const auto& m : table.thresholds) used.push_back(thresholds_json(m));

  const std::string csv = csv_table(table);
  Json manifest;
  manifest["tool"] = "sparsedet";
  manifest["version"] = SPARSEDET_VERSION;
  manifest["command"] = command;
  manifest["config"] = spec_to_json(spec);
  manifest["seed"] = config.seed;
  manifest["started_at"] = started;
  manifest["elapsed_s"] = elapsed;
  manifest["threshold_cache"] = {
      {"path", cache_file.string()}, {"hits", resolver.hits()}, {"misses", resolver.misses()}};
  manifest["thresholds_used"] = used;
  manifest["implication_violations"] = violations;

  std::string manifest_path = o.manifest;
  if (!o.out.empty()) {
    write_file(o.out, csv);
    manifest["output"] = o.out;
    if (manifest_path.empty()) manifest_path = o.out + ".manifest.json";
  } else {
    out << csv;
  }
  if (!manifest_path.empty()) write_file(manifest_path, manifest.dump(2) + "\n");
  return kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
  RunSpec spec = spec_from_json(layered_settings(o, "calibrate"));
  ExperimentConfig& config = spec.config;
  if (config.detectors.empty()) throw ConfigError("calibrate needs --det");
  config.validate();
  for (DetectorId id : config.detectors) {
    if (threshold_companion(id) != id)
      throw ConfigError(std::string(detector_name(id)) +
                        " runs at its companion's threshold; calibrate that detector instead");
    const bool monte_carlo = id != DetectorId::Kelly && id != DetectorId::Amf;
    if (monte_carlo && !spec.seed_given)
      throw ConfigError("--seed is required for Monte Carlo calibration");
  }

  const auto cache_file = cache_path(o);
  ThresholdTable cache = ThresholdTable::load(cache_file);
  const std::int64_t trials = config.trials > 0 ? config.trials : spec.calibration_trials;
  ThresholdResolver resolver(CalibrationPolicy{trials, config.seed, config.workers}, &cache);
  const NullScene scene = config.null_scene();

  std::string report = "detector,n,k,pfa,threshold,method,trials,seed,cache\r\n";
  for (DetectorId id : config.detectors) {
    const int hits_before = resolver.hits();
    const ThresholdRecord r = resolver.resolve(id, scene, config.nominal_pfa);
    report += std::string(detector_name(id)) + ',' + std::to_string(r.key.n) + ',' +
              std::to_string(r.key.k) + ',' + format_double(r.key.pfa) + ',' +
              format_double(r.value) + ',' + std::string(method_name(r.method)) + ',' +
              std::to_string(r.trials) + ',' + (r.seed ? std::to_string(*r.seed) : "") + ',' +
              (resolver.hits() > hits_before ? "hit" : "computed") + "\r\n";
  }
  if (resolver.misses() > 0) cache.save(cache_file);
  if (!o.out.empty()) {
    write_file(o.out, report);
  } else {
    out << report;
  }
  return kExitOk;
}

int cmd_coherence(const Options& o, std::ostream& out) {
  RunSpec spec = spec_from_json(layered_settings(o, "coherence"));
  const ExperimentConfig& config = spec.config;
  std::vector<double> deltas = spec.values;
  if (deltas.empty()) deltas.push_back(config.grid.delta_deg);
  const InterferenceModel model = config.interference.build(config.n_elements);
  std::string body = "delta_theta_deg,n_bins,bin_coherence,dictionary_coherence\r\n";
  for (double delta : deltas) {
    GridSpec grid = config.grid;
    grid.delta_deg = delta;
    const Dictionary dict(config.geometry(), grid.build());
    body += format_double(delta) + ',' + std::to_string(dict.n_bins()) + ',' +
            format_double(bin_coherence(dict, model, dict.nominal_index())) + ',' +
            format_double(dictionary_coherence(dict, model)) + "\r\n";
  }
  if (!o.out.empty()) {
    write_file(o.out, body);
  } else {
    out << body;
  }
  return kExitOk;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

std::string csv_table(const ResultTable& table) {
  std::string body;
  const std::vector<AxisValue> no_axes;
  const auto& header_axes = table.rows.empty() ? no_axes : table.rows.front().axes;
  for (const auto& a : header_axes) body += csv_field(a.name) + ',';
  body += "detector,estimate,ci_halfwidth,trials,seed\r\n";
  for (const auto& row : table.rows) {
    for (const auto& a : row.axes) body += format_double(a.value) + ',';
    body += csv_field(detector_name(row.detector)) + ',' + format_double(row.estimate) + ',' +
            format_double(row.ci_halfwidth) + ',' + std::to_string(row.trials) + ',' +
            std::to_string(row.seed) + "\r\n";
  }
  return body;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-recovery adaptive detectors: threshold calibration and Monte Carlo"};
  app.set_version_flag("--version", SPARSEDET_VERSION);
  app.require_subcommand(1);

  Options o;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"calibrate", "compute or look up detection thresholds"},
      {"pfa", "estimate false-alarm probabilities"},
      {"pd", "estimate detection probabilities"},
      {"sweep", "sweep one parameter"},
      {"mesa", "detection probability over target angle x SINR"},
      {"coherence", "whitened dictionary coherence"},
  };
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, std::map<std::string, CLI::Option*>> given;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_flags(*sub, o);
    given[name] = o.given;
    subs[name] = sub;
  }
  auto* presets = app.add_subcommand("presets", "list named presets");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (presets->parsed()) {
      for (const auto& name : preset_names()) out << name << ' ' << preset(name)->dump() << '\n';
      return kExitOk;
    }
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) o.given = given[name];
    if (subs["calibrate"]->parsed()) return cmd_calibrate(o, out);
    if (subs["coherence"]->parsed()) return cmd_coherence(o, out);
    for (const char* name : {"pfa", "pd", "sweep", "mesa"})
      if (subs[name]->parsed()) return cmd_results(name, o, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CalibrationError& e) {
    err << "calibration error: " << e.what() << '\n';
    return kExitCalibration;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace sparsedet::cli
