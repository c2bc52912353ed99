// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Settings are layered defaults < --figure preset <
// --config file < flags, and every result file is paired with a JSON
// manifest that replays it.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sparsedet/monte_carlo.hpp"

namespace sparsedet::cli {

using Json = nlohmann::json;

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCalibration = 3;
inline constexpr int kExitNumeric = 4;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Everything a command needs once the settings layers are merged.
struct RunSpec {
  ExperimentConfig config;
  Hypothesis hypothesis = Hypothesis::H1;
  std::optional<SweepAxis> axis;
  std::vector<double> values;
  std::vector<double> theta_values;
  std::vector<double> sinr_values;
  std::int64_t calibration_trials = 0;
  std::uint64_t calibration_seed = 0;
  bool seed_given = false;
};

/// Flat TOML subset: key = value lines, [section] headers as one nesting
/// level, strings, numbers, booleans and single-line arrays.
Json parse_toml(const std::string& text);

/// JSON or TOML by extension (.json / .toml); a manifest yields its "config".
Json load_config_file(const std::string& path);

/// "a:step:b" inclusive range or comma list.
std::vector<double> parse_values(std::string_view text);

/// Named parameter sets; nullopt for unknown names.
std::optional<Json> preset(std::string_view name);
std::vector<std::string> preset_names();

/// Builds a RunSpec from merged settings; unknown keys are rejected.
RunSpec spec_from_json(const Json& settings);
/// Fully resolved settings, the inverse of spec_from_json.
Json spec_to_json(const RunSpec& spec);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
/// RFC 4180 with CRLF line ends: axis columns, detector, estimate,
/// ci_halfwidth, trials, seed.
std::string csv_table(const ResultTable& table);

}  // namespace sparsedet::cli
