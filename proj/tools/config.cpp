// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "sparsedet/errors.hpp"

namespace sparsedet::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || t.empty())
    throw ConfigError("not a number: '" + t + "'");
  return v;
}

// ---- TOML subset ----

class TomlLine {
 public:
  TomlLine(std::string_view text, int line) : s_(text), line_(line) {}

  Json value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    Json v;
    const char c = s_[pos_];
    if (c == '"') {
      v = string();
    } else if (c == '[') {
      ++pos_;
      v = Json::array();
      for (;;) {
        skip_ws();
        if (peek() == ']') {
          ++pos_;
          break;
        }
        v.push_back(value());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
        } else if (peek() == ']') {
          ++pos_;
          break;
        } else {
          fail("expected ',' or ']'");
        }
      }
    } else {
      const auto start = pos_;
      while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' &&
             s_[pos_] != '\t')
        ++pos_;
      const std::string word(s_.substr(start, pos_ - start));
      if (word == "true") {
        v = true;
      } else if (word == "false") {
        v = false;
      } else {
        v = scalar_number(word);
      }
    }
    return v;
  }

  void expect_end() {
    skip_ws();
    if (pos_ < s_.size()) fail("trailing characters");
  }

 private:
  Json scalar_number(const std::string& word) {
    std::string w;
    for (char ch : word)
      if (ch != '_') w += ch;
    std::int64_t i = 0;
    const auto* end = w.data() + w.size();
    if (auto [p, ec] = std::from_chars(w.data() + (w[0] == '+'), end, i);
        ec == std::errc() && p == end)
      return i;
    try {
      return to_double(w[0] == '+' ? w.substr(1) : w);
    } catch (const ConfigError&) {
      fail("bad value '" + word + "'");
    }
    return {};
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char ch = s_[pos_++];
      if (ch == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        ch = e == 'n' ? '\n' : e == 't' ? '\t' : e;
      }
      out += ch;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("TOML line " + std::to_string(line_) + ": " + what);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

// ---- typed accessors ----

double get_real(const Json& j, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_double(j.get<std::string>());
  throw ConfigError("'" + key + "' must be a number");
}

std::int64_t get_int(const Json& j, const std::string& key) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  const double v = get_real(j, key);
  if (!std::isfinite(v) || std::floor(v) != v || std::abs(v) > 9.0e18)
    throw ConfigError("'" + key + "' must be an integer");
  return static_cast<std::int64_t>(v);
}

std::uint64_t get_seed(const Json& j, const std::string& key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) throw ConfigError("'" + key + "' must be non-negative");
    return j.get<std::uint64_t>();
  }
  if (j.is_string()) {
    const std::string s = trim(j.get<std::string>());
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec == std::errc() && ptr == end && !s.empty()) return v;
  }
  throw ConfigError("'" + key + "' must be a non-negative 64-bit integer");
}

std::vector<double> get_reals(const Json& j, const std::string& key) {
  if (j.is_string()) return parse_values(j.get<std::string>());
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw ConfigError("'" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(get_real(e, key));
  return out;
}

std::vector<DetectorId> get_detectors(const Json& j) {
  std::vector<std::string> names;
  if (j.is_string()) {
    names = split(j.get<std::string>(), ',');
  } else if (j.is_array()) {
    for (const auto& e : j) {
      if (!e.is_string()) throw ConfigError("detector names must be strings");
      names.push_back(e.get<std::string>());
    }
  } else {
    throw ConfigError("'detectors' must be a list of names");
  }
  std::vector<DetectorId> out;
  for (const auto& n : names) {
    if (n.empty()) continue;
    const auto id = parse_detector(n);
    if (!id) throw ConfigError("unknown detector '" + n + "'");
    if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
  }
  return out;
}

CMatrix get_covariance(const Json& j) {
  if (!j.is_object() || !j.contains("re")) throw ConfigError("'covariance' needs a 're' matrix");
  auto read = [](const Json& m) {
    if (!m.is_array() || m.empty()) throw ConfigError("covariance parts must be square matrices");
    const auto n = static_cast<Eigen::Index>(m.size());
    RMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Json& row = m[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
        throw ConfigError("covariance parts must be square matrices");
      for (Eigen::Index c = 0; c < n; ++c) out(i, c) = get_real(row[static_cast<std::size_t>(c)], "covariance");
    }
    return out;
  };
  const RMatrix re = read(j.at("re"));
  RMatrix im = RMatrix::Zero(re.rows(), re.cols());
  if (j.contains("im")) im = read(j.at("im"));
  if (im.rows() != re.rows()) throw ConfigError("covariance parts differ in size");
  CMatrix out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

Json matrix_json(const RMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    out.push_back(row);
  }
  return out;
}

std::uint64_t derived_calibration_seed(std::uint64_t seed) {
  return mix64(seed ^ 0x63616c6962726174ULL);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "n",           "spacing",      "pointing",     "delta_theta",  "span",
      "n_bins",      "rho",          "covariance",   "k",            "sinr",
      "theta_t",     "phase",        "detectors",    "pfa",          "trials",
      "seed",        "workers",      "n_iter",       "q_grid",       "h_max",
      "tolerance",   "thresholds",   "hyp",          "axis",         "values",
      "theta_values", "sinr_values", "calibration_trials", "calibration_seed", "command"};
  return keys;
}

const std::map<std::string, std::string, std::less<>>& preset_table() {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"fig2",
       R"({"command":"sweep","hyp":"h0","axis":"n_iterations","values":"1:1:20","n":8,"k":32,
           "delta_theta":3,"span":48,
           "detectors":["sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig3",
       R"({"command":"sweep","hyp":"h0","axis":"k","values":"16:8:64","n":8,"delta_theta":3,
           "span":48,"detectors":["sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig4",
       R"({"command":"sweep","hyp":"h0","axis":"delta_theta","values":"1:0.5:4","n":8,"k":32,
           "span":48,"detectors":["sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig5",
       R"({"command":"sweep","hyp":"h1","axis":"delta_theta","values":"1:0.5:4","n":8,"k":32,
           "sinr":14,"theta_t":0,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig6",
       R"({"command":"sweep","hyp":"h1","axis":"delta_theta","values":"0.5:0.25:2","n":24,"k":96,
           "sinr":14,"theta_t":0,"span":15,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig7a",
       R"({"command":"sweep","hyp":"h1","axis":"k","values":"16:8:64","n":8,"sinr":14,"theta_t":0,
           "delta_theta":1,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig7b",
       R"({"command":"sweep","hyp":"h1","axis":"k","values":"16:8:64","n":8,"sinr":14,"theta_t":0,
           "delta_theta":2,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig8a",
       R"({"command":"sweep","hyp":"h1","axis":"sinr_db","values":"0:2:20","n":8,"k":32,"theta_t":0,
           "delta_theta":1,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig8b",
       R"({"command":"sweep","hyp":"h1","axis":"sinr_db","values":"0:2:20","n":8,"k":32,"theta_t":0,
           "delta_theta":2,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig9a",
       R"({"command":"sweep","hyp":"h1","axis":"k","values":"16:8:40","n":8,"sinr":14,"theta_t":0.5,
           "delta_theta":2,"span":48,
           "detectors":["amf","kelly","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig9b",
       R"({"command":"sweep","hyp":"h1","axis":"k","values":"16:8:40","n":8,"sinr":14,"theta_t":2,
           "delta_theta":2,"span":48,
           "detectors":["amf","kelly","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig10a",
       R"({"command":"sweep","hyp":"h1","axis":"sinr_db","values":"0:2:20","n":8,"k":32,"theta_t":0.5,
           "delta_theta":2,"span":48,
           "detectors":["amf","kelly","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig10b",
       R"({"command":"sweep","hyp":"h1","axis":"sinr_db","values":"0:2:20","n":8,"k":32,"theta_t":2,
           "delta_theta":2,"span":48,
           "detectors":["amf","kelly","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig11a",
       R"({"command":"sweep","hyp":"h1","axis":"theta_t_deg","values":"0:0.25:6","n":8,"k":32,
           "sinr":14,"delta_theta":1,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig11b",
       R"({"command":"sweep","hyp":"h1","axis":"theta_t_deg","values":"0:0.25:6","n":8,"k":32,
           "sinr":14,"delta_theta":2,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig11c",
       R"({"command":"sweep","hyp":"h1","axis":"theta_t_deg","values":"0:0.25:6","n":8,"k":32,
           "sinr":20,"delta_theta":1,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig11d",
       R"({"command":"sweep","hyp":"h1","axis":"theta_t_deg","values":"0:0.25:6","n":8,"k":32,
           "sinr":20,"delta_theta":2,"span":48,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig12",
       R"({"command":"mesa","n":8,"k":32,"delta_theta":1,"span":48,"theta_values":"0:0.5:6",
           "sinr_values":"0:2:30","detectors":["ace","wabort","sad-glrt","bslim-glrt"]})"},
      {"fig13a",
       R"({"command":"sweep","hyp":"h1","axis":"theta_t_deg","values":"0:0.25:4","n":24,"k":96,
           "sinr":14,"delta_theta":0.5,"span":15,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
      {"fig13b",
       R"({"command":"sweep","hyp":"h1","axis":"theta_t_deg","values":"0:0.25:4","n":24,"k":96,
           "sinr":14,"delta_theta":1,"span":15,
           "detectors":["amf","kelly","rao","wabort","ace","sad-glrt","sad-amf","bslim-amf","bslim-glrt"]})"},
  };
  return table;
}

}  // namespace

Json parse_toml(const std::string& text) {
  Json root = Json::object();
  Json* section = &root;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("TOML line " + std::to_string(line_no) + ": bad section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (root.contains(name) && !root[name].is_object())
        throw ConfigError("TOML line " + std::to_string(line_no) + ": '" + name + "' redefined");
      if (!root.contains(name)) root[name] = Json::object();
      section = &root[name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("TOML line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    if (key.empty()) throw ConfigError("TOML line " + std::to_string(line_no) + ": empty key");
    TomlLine parser(std::string_view(line).substr(eq + 1), line_no);
    Json value = parser.value();
    parser.expect_end();
    if (section->contains(key))
      throw ConfigError("TOML line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    (*section)[key] = std::move(value);
  }
  return root;
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const bool toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  Json j;
  if (toml) {
    j = parse_toml(text);
  } else {
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError("config file '" + path + "': " + e.what());
    }
  }
  if (!j.is_object()) throw ConfigError("config file must hold an object");
  if (j.contains("config") && j.contains("tool")) {
    if (!j["config"].is_object()) throw ConfigError("manifest 'config' must be an object");
    return j["config"];
  }
  return j;
}

std::vector<double> parse_values(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty value list");
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ConfigError("range must be start:step:stop");
    const double a = to_double(parts[0]);
    const double step = to_double(parts[1]);
    const double b = to_double(parts[2]);
    if (!(step > 0.0) || b < a) throw ConfigError("range needs step > 0 and stop >= start");
    const auto count = static_cast<std::int64_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 1000000) throw ConfigError("range has too many points");
    std::vector<double> out;
    for (std::int64_t i = 0; i < count; ++i) {
      // Snap to a decimal grid so 0.1-type steps give clean axis values.
      const double v = a + static_cast<double>(i) * step;
      out.push_back(std::round(v * 1e9) / 1e9);
    }
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(t, ',')) out.push_back(to_double(p));
  return out;
}

std::optional<Json> preset(std::string_view name) {
  const auto& table = preset_table();
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return Json::parse(it->second);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, body] : preset_table()) out.push_back(name);
  return out;
}

RunSpec spec_from_json(const Json& s) {
  if (!s.is_object()) throw ConfigError("settings must be an object");
  for (const auto& [key, value] : s.items())
    if (!known_keys().contains(key)) throw ConfigError("unknown setting '" + key + "'");

  RunSpec spec;
  ExperimentConfig& c = spec.config;
  auto has = [&](const char* key) { return s.contains(key) && !s[key].is_null(); };
  auto as_int = [&](const char* key) {
    const auto v = get_int(s[key], key);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      throw ConfigError(std::string("'") + key + "' out of range");
    return static_cast<int>(v);
  };

  if (has("n")) c.n_elements = as_int("n");
  if (has("spacing")) c.spacing_ratio = get_real(s["spacing"], "spacing");
  if (has("pointing")) c.grid.pointing_deg = get_real(s["pointing"], "pointing");
  if (has("delta_theta")) c.grid.delta_deg = get_real(s["delta_theta"], "delta_theta");
  if (has("span")) c.grid.half_span_deg = get_real(s["span"], "span");
  if (has("n_bins")) c.grid.n_bins = as_int("n_bins");
  if (has("rho")) c.interference.rho = get_real(s["rho"], "rho");
  if (has("covariance")) c.interference.covariance = get_covariance(s["covariance"]);
  if (has("k")) c.k = as_int("k");
  if (has("sinr")) c.sinr_db = get_real(s["sinr"], "sinr");
  if (has("theta_t")) c.theta_t_deg = get_real(s["theta_t"], "theta_t");
  if (has("phase")) c.phase_rad = get_real(s["phase"], "phase");
  if (has("detectors")) c.detectors = get_detectors(s["detectors"]);
  if (has("pfa")) c.nominal_pfa = get_real(s["pfa"], "pfa");
  if (has("trials")) {
    c.trials = get_int(s["trials"], "trials");
    if (c.trials < 0) throw ConfigError("'trials' must be positive");
  }
  if (has("seed")) {
    c.seed = get_seed(s["seed"], "seed");
    spec.seed_given = true;
  }
  if (has("workers")) c.workers = as_int("workers");
  if (has("n_iter")) c.slim.n_iterations = as_int("n_iter");
  if (has("q_grid")) c.slim.q_grid = get_reals(s["q_grid"], "q_grid");
  if (has("h_max")) c.slim.h_max = as_int("h_max");
  if (has("tolerance")) c.slim.relative_tolerance = get_real(s["tolerance"], "tolerance");
  if (has("thresholds")) {
    if (!s["thresholds"].is_object()) throw ConfigError("'thresholds' must map detector names to values");
    for (const auto& [name, value] : s["thresholds"].items()) {
      const auto id = parse_detector(name);
      if (!id) throw ConfigError("unknown detector '" + name + "' in thresholds");
      c.explicit_thresholds[*id] = get_real(value, "thresholds." + name);
    }
  }
  if (has("hyp")) {
    const std::string h = s["hyp"].is_string() ? s["hyp"].get<std::string>() : "";
    if (h == "h0" || h == "H0") {
      spec.hypothesis = Hypothesis::H0;
    } else if (h == "h1" || h == "H1") {
      spec.hypothesis = Hypothesis::H1;
    } else {
      throw ConfigError("'hyp' must be h0 or h1");
    }
  }
  if (has("axis")) {
    if (!s["axis"].is_string()) throw ConfigError("'axis' must be a name");
    spec.axis = parse_axis(s["axis"].get<std::string>());
    if (!spec.axis) throw ConfigError("unknown sweep axis '" + s["axis"].get<std::string>() + "'");
  }
  if (has("values")) spec.values = get_reals(s["values"], "values");
  if (has("theta_values")) spec.theta_values = get_reals(s["theta_values"], "theta_values");
  if (has("sinr_values")) spec.sinr_values = get_reals(s["sinr_values"], "sinr_values");
  if (has("calibration_trials")) {
    spec.calibration_trials = get_int(s["calibration_trials"], "calibration_trials");
    if (spec.calibration_trials < 0) throw ConfigError("'calibration_trials' must be positive");
  }
  spec.calibration_seed = has("calibration_seed")
                              ? get_seed(s["calibration_seed"], "calibration_seed")
                              : derived_calibration_seed(c.seed);
  return spec;
}

Json spec_to_json(const RunSpec& spec) {
  const ExperimentConfig& c = spec.config;
  Json j;
  j["n"] = c.n_elements;
  j["spacing"] = c.spacing_ratio;
  j["pointing"] = c.grid.pointing_deg;
  j["delta_theta"] = c.grid.delta_deg;
  j["span"] = c.grid.half_span_deg;
  j["n_bins"] = c.grid.n_bins;
  j["rho"] = c.interference.rho;
  if (c.interference.covariance) {
    j["covariance"] = {{"re", matrix_json(c.interference.covariance->real())},
                       {"im", matrix_json(c.interference.covariance->imag())}};
  }
  j["k"] = c.k;
  j["sinr"] = c.sinr_db;
  j["theta_t"] = c.theta_t_deg;
  j["phase"] = c.phase_rad;
  Json dets = Json::array();
  for (DetectorId id : c.detectors) dets.push_back(std::string(detector_name(id)));
  j["detectors"] = dets;
  j["pfa"] = c.nominal_pfa;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["n_iter"] = c.slim.n_iterations;
  j["q_grid"] = c.slim.q_grid;
  j["h_max"] = c.slim.h_max;
  if (c.slim.relative_tolerance) j["tolerance"] = *c.slim.relative_tolerance;
  Json thr = Json::object();
  for (const auto& [id, value] : c.explicit_thresholds) thr[std::string(detector_name(id))] = value;
  j["thresholds"] = thr;
  j["hyp"] = spec.hypothesis == Hypothesis::H0 ? "h0" : "h1";
  if (spec.axis) j["axis"] = std::string(axis_name(*spec.axis));
  if (!spec.values.empty()) j["values"] = spec.values;
  if (!spec.theta_values.empty()) j["theta_values"] = spec.theta_values;
  if (!spec.sinr_values.empty()) j["sinr_values"] = spec.sinr_values;
  j["calibration_trials"] = spec.calibration_trials;
  j["calibration_seed"] = spec.calibration_seed;
  return j;
}

}  // namespace sparsedet::cli
