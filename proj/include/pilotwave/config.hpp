// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file config.hpp
 * @brief Run configuration: flat key = value text with section headers.
 *
 * Grammar, one statement per line:
 *
 *     # comment
 *     key = value            run keys, before any header or under [run]
 *     [double_slit]          parameter overrides for one scenario
 *     slit_separation = 7.5
 *     [custom]               keys of the custom run (see CustomSpec)
 *
 * Values are numbers, "quoted strings", true/false, or [lists] of those.
 * Run keys: scenario, seed, n, workers, out, format, skip_checks. Overrides
 * for scenarios other than the selected one are validated but not applied.
 * Environment variables PILOTWAVE_SEED, PILOTWAVE_N, PILOTWAVE_WORKERS,
 * PILOTWAVE_OUT and PILOTWAVE_FORMAT override the file; command-line flags
 * override both.
 */

#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pilotwave/experiments.hpp"

namespace pilotwave {

/// Scenario-free run: a wave function file guided on its own grid.
struct CustomSpec {
  std::string psi0_file;       ///< field file holding psi0 (scalar or spinor)
  std::string potential = "free";  ///< potential spec, e.g. harmonic(1) or file(v.pwf)
  double t_final = 1.0;
  double hbar = 1.0;
  double mass = 1.0;
  std::size_t stride = 10;
  std::size_t bins = 64;  ///< marginal bins along axis 0 for the equivariance check
};

struct RunConfig {
  std::string scenario;  ///< registry name or "custom"
  Parameters overrides;
  std::optional<std::size_t> n;  ///< ensemble size; unset keeps the scenario default
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out = "pilotwave-out";
  std::string format = "csv";
  std::set<std::string> skip_checks;
  CustomSpec custom;

  bool is_custom() const { return scenario == "custom"; }

  /// Scenario parameters with n folded in, ready for build_scenario.
  Parameters scenario_parameters() const {
    Parameters p = overrides;
    if (n) p["n"] = static_cast<double>(*n);
    return p;
  }
};

namespace detail {

using ConfigValue = std::variant<double, bool, std::string, std::vector<std::string>>;

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

[[noreturn]] inline void config_fail(std::size_t line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

/// Drop a trailing comment that is not inside a string.
inline std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

inline std::string parse_string(const std::string& v, std::size_t line) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') config_fail(line, "malformed string " + v);
  const std::string body = v.substr(1, v.size() - 2);
  if (body.find('"') != std::string::npos) config_fail(line, "malformed string " + v);
  return body;
}

inline ConfigValue parse_value(const std::string& v, std::size_t line) {
  if (v.empty()) config_fail(line, "missing value");
  if (v.front() == '"') return parse_string(v, line);
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']') config_fail(line, "unterminated list");
    std::vector<std::string> items;
    const std::string body = trim(std::string_view(v).substr(1, v.size() - 2));
    if (body.empty()) return items;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      items.push_back(item.size() && item.front() == '"' ? parse_string(item, line) : item);
      if (items.back().empty()) config_fail(line, "empty list item");
    }
    return items;
  }
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) config_fail(line, "cannot parse value " + v);
  return x;
}

inline double as_number(const ConfigValue& v, const std::string& key, std::size_t line) {
  if (const double* x = std::get_if<double>(&v)) return *x;
  config_fail(line, "'" + key + "' expects a number");
}

inline std::string as_string(const ConfigValue& v, const std::string& key, std::size_t line) {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  config_fail(line, "'" + key + "' expects a quoted string");
}

inline std::string format_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

inline std::uint64_t as_count(double x, const std::string& key, double lo, double hi, std::size_t line) {
  if (x != std::floor(x) || x < lo || x > hi)
    config_fail(line, "'" + key + "' = " + format_number(x) + " must be an integer in [" + format_number(lo) + ", " +
                          format_number(hi) + "]");
  return static_cast<std::uint64_t>(x);
}

inline void check_format(const std::string& f, std::size_t line) {
  if (f != "csv" && f != "json") config_fail(line, "'format' must be \"csv\" or \"json\"");
}

inline void apply_run_key(RunConfig& c, const std::string& key, const ConfigValue& v, std::size_t line) {
  if (key == "scenario") c.scenario = as_string(v, key, line);
  else if (key == "seed") c.seed = as_count(as_number(v, key, line), key, 0, 9007199254740992.0, line);
  else if (key == "n") c.n = as_count(as_number(v, key, line), key, 1, 1e7, line);
  else if (key == "workers") c.workers = static_cast<unsigned>(as_count(as_number(v, key, line), key, 1, 1024, line));
  else if (key == "out") c.out = as_string(v, key, line);
  else if (key == "format") {
    c.format = as_string(v, key, line);
    check_format(c.format, line);
  } else if (key == "skip_checks") {
    const auto* list = std::get_if<std::vector<std::string>>(&v);
    if (!list) config_fail(line, "'skip_checks' expects a list of check names");
    c.skip_checks = {list->begin(), list->end()};
  } else {
    config_fail(line, "unknown key '" + key + "'");
  }
}

inline void apply_custom_key(CustomSpec& c, const std::string& key, const ConfigValue& v, std::size_t line) {
  if (key == "psi0") c.psi0_file = as_string(v, key, line);
  else if (key == "potential") c.potential = as_string(v, key, line);
  else if (key == "t_final") {
    c.t_final = as_number(v, key, line);
    if (!(c.t_final > 0.0)) config_fail(line, "'t_final' must be > 0");
  } else if (key == "hbar" || key == "mass") {
    const double x = as_number(v, key, line);
    if (!(x > 0.0)) config_fail(line, "'" + key + "' must be > 0");
    (key == "hbar" ? c.hbar : c.mass) = x;
  } else if (key == "stride") c.stride = as_count(as_number(v, key, line), key, 1, 1e6, line);
  else if (key == "bins") c.bins = as_count(as_number(v, key, line), key, 2, 1e5, line);
  else config_fail(line, "unknown key '" + key + "' in [custom]");
}

}  // namespace detail

/**
 * Parse and validate a configuration. `base_dir` resolves relative file
 * names in [custom]. Errors carry the line number or the offending key.
 */
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  RunConfig c;
  std::map<std::string, std::pair<Parameters, std::size_t>> sections;  // scenario -> overrides, header line
  std::string section = "run";
  std::set<std::string> seen_sections, seen_keys;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = detail::trim(detail::strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') detail::config_fail(line, "malformed section header");
      section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) detail::config_fail(line, "empty section name");
      if (!seen_sections.insert(section).second) detail::config_fail(line, "duplicate section [" + section + "]");
      if (section != "run" && section != "custom") {
        try {
          scenario_info(section);
        } catch (const ConfigError&) {
          detail::config_fail(line, "unknown section [" + section + "]");
        }
        sections[section].second = line;
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) detail::config_fail(line, "expected key = value");
    const std::string key = detail::trim(std::string_view(s).substr(0, eq));
    const std::string value = detail::trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) detail::config_fail(line, "missing key");
    if (!seen_keys.insert(section + "." + key).second) detail::config_fail(line, "duplicate key '" + key + "'");
    const auto v = detail::parse_value(value, line);
    if (section == "run") {
      detail::apply_run_key(c, key, v, line);
    } else if (section == "custom") {
      detail::apply_custom_key(c.custom, key, v, line);
    } else {
      if (key == "n") detail::config_fail(line, "set 'n' as a run key, not in [" + section + "]");
      const ScenarioInfo& info = scenario_info(section);
      const double x = detail::as_number(v, key, line);
      try {
        resolve_parameters(info, {{key, x}});
      } catch (const ConfigError& e) {
        detail::config_fail(line, e.what());
      }
      sections[section].first[key] = x;
    }
  }
  if (c.scenario.empty()) throw ConfigError("missing required key 'scenario'");
  if (c.is_custom()) {
    if (c.custom.psi0_file.empty()) throw ConfigError("custom run needs 'psi0' in [custom]");
    auto resolve = [&](std::string& f) {
      if (f.empty()) return;
      std::filesystem::path p(f);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      if (!std::filesystem::exists(p)) throw ConfigError("referenced file does not exist: " + p.string());
      f = p.string();
    };
    resolve(c.custom.psi0_file);
    auto& pot = c.custom.potential;
    if (pot.rfind("file(", 0) == 0 && pot.back() == ')') {
      std::string f = detail::trim(std::string_view(pot).substr(5, pot.size() - 6));
      resolve(f);
      pot = "file(" + f + ")";
    }
  } else {
    const ScenarioInfo& info = scenario_info(c.scenario);
    if (seen_sections.count("custom")) throw ConfigError("[custom] given but scenario is '" + c.scenario + "'");
    if (auto it = sections.find(c.scenario); it != sections.end()) c.overrides = it->second.first;
    const bool has_n = std::any_of(info.params.begin(), info.params.end(), [](const ParamSpec& p) { return p.name == "n"; });
    if (c.n && !has_n) throw ConfigError("'n': scenario '" + c.scenario + "' has no ensemble");
    resolve_parameters(info, c.scenario_parameters());
    std::set<std::string> names;
    for (const auto& chk : info.checks) names.insert(chk.name);
    for (const auto& k : c.skip_checks)
      if (!names.count(k)) throw ConfigError("'skip_checks': scenario '" + c.scenario + "' has no check '" + k + "'");
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

/// Apply PILOTWAVE_* variables from `getenv` (injectable for tests).
template <class Getenv>
void apply_environment(RunConfig& c, Getenv&& getenv) {
  auto number = [&](const char* name, double lo, double hi) -> std::optional<std::uint64_t> {
    const char* v = getenv(name);
    if (!v) return std::nullopt;
    double x = 0.0;
    const std::string s(v);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size() || x != std::floor(x) || x < lo || x > hi)
      throw ConfigError(std::string(name) + " = '" + s + "' is not an integer in range");
    return static_cast<std::uint64_t>(x);
  };
  if (auto x = number("PILOTWAVE_SEED", 0, 9007199254740992.0)) c.seed = *x;
  if (auto x = number("PILOTWAVE_N", 1, 1e7)) c.n = *x;
  if (auto x = number("PILOTWAVE_WORKERS", 1, 1024)) c.workers = static_cast<unsigned>(*x);
  if (const char* v = getenv("PILOTWAVE_OUT")) c.out = v;
  if (const char* v = getenv("PILOTWAVE_FORMAT")) {
    if (std::string(v) != "csv" && std::string(v) != "json") throw ConfigError("PILOTWAVE_FORMAT must be csv or json");
    c.format = v;
  }
}

inline void apply_environment(RunConfig& c) {
  apply_environment(c, [](const char* name) { return std::getenv(name); });
}

}  // namespace pilotwave
