// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file runner.hpp
 * @brief Run orchestration: reports, data files and manifests.
 *
 * A run writes into its output directory:
 *
 *   report.json            scenario, seed, parameters, checks, pass
 *   <table>.csv | .json    plot data, one file per table
 *   manifest.json          config echo, tool version, wall time, checks,
 *                          failures, and a SHA-256 digest of every data file
 *
 * Data files depend only on (scenario, parameters, seed); the worker count
 * and timings appear in the manifest alone.
 */

#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "pilotwave/config.hpp"
#include "pilotwave/field_io.hpp"

namespace pilotwave {

inline constexpr const char* kToolVersion = "0.4.0";

enum ExitCode : int { kExitPass = 0, kExitCheckFailure = 2, kExitConfigError = 3, kExitNumericalFault = 4 };

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json check_json(const CheckResult& c) {
  return {{"name", c.name},       {"value", c.value}, {"bound", c.bound},
          {"comparison", c.comparison}, {"pass", c.pass}, {"tolerance", c.tolerance}};
}

inline nlohmann::json report_json(const ScenarioReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(check_json(c));
  return {{"scenario", r.scenario}, {"seed", r.seed}, {"parameters", r.parameters}, {"checks", checks}, {"pass", r.pass()}};
}

inline void write_table_csv(std::ostream& os, const DataTable& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      write_number(os, row[c]);
    }
    os << '\n';
  }
}

inline nlohmann::json table_json(const DataTable& t) {
  return {{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}};
}

inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j{{"scenario", c.scenario},
                   {"overrides", c.overrides},
                   {"seed", c.seed},
                   {"workers", c.workers},
                   {"out", c.out},
                   {"format", c.format},
                   {"skip_checks", c.skip_checks}};
  j["n"] = c.n ? nlohmann::json(*c.n) : nlohmann::json(nullptr);
  if (c.is_custom())
    j["custom"] = {{"psi0", c.custom.psi0_file}, {"potential", c.custom.potential}, {"t_final", c.custom.t_final},
                   {"hbar", c.custom.hbar},      {"mass", c.custom.mass},           {"stride", c.custom.stride},
                   {"bins", c.custom.bins}};
  return j;
}

/// Inverse of config_json, used to replay a run from its manifest.
inline RunConfig config_from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.scenario = j.at("scenario").get<std::string>();
    c.overrides = j.at("overrides").get<Parameters>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.workers = j.at("workers").get<unsigned>();
    c.out = j.at("out").get<std::string>();
    c.format = j.at("format").get<std::string>();
    c.skip_checks = j.at("skip_checks").get<std::set<std::string>>();
    if (!j.at("n").is_null()) c.n = j.at("n").get<std::size_t>();
    if (c.is_custom()) {
      const auto& k = j.at("custom");
      c.custom = {k.at("psi0").get<std::string>(), k.at("potential").get<std::string>(), k.at("t_final").get<double>(),
                  k.at("hbar").get<double>(),      k.at("mass").get<double>(),          k.at("stride").get<std::size_t>(),
                  k.at("bins").get<std::size_t>()};
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config echo: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Custom run: evolve psi0 from a field file, push a Born ensemble, compare on axis 0.
inline ScenarioReport run_custom(const RunConfig& c) {
  const CustomSpec& k = c.custom;
  SpinorField psi0;
  try {
    psi0 = normalize(load_field(k.psi0_file));
  } catch (const NumericalFault&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("psi0: ") + e.what());
  }
  const Grid& g = psi0.grid();
  HamiltonianSpec h = make_hamiltonian(g, psi0.spin_dim(), ParticleLayout::single(g.rank(), k.mass), k.hbar);
  apply_potential_spec(h, k.potential);
  auto cfg = default_config(h);
  cfg.snapshot_stride = k.stride;
  const auto evo = std::make_shared<WaveEvolution>(evolve(psi0, h, k.t_final, cfg));
  const GuidanceField field(evo, c.workers);
  const std::size_t n = c.n.value_or(10000);
  const Ensemble start = sample_born(psi0, n, c.seed, c.workers);
  const Ensemble end = push_forward(field, start, k.t_final, evo->max_spacing(), {}, c.workers);

  ScenarioReport r;
  r.scenario = "custom";
  r.seed = c.seed;
  r.parameters = {{"t_final", k.t_final}, {"hbar", k.hbar}, {"mass", k.mass}, {"stride", static_cast<double>(k.stride)},
                  {"bins", static_cast<double>(k.bins)}, {"n", static_cast<double>(n)}};
  const Axis& ax = g.axis(0);
  const BinSpec bins = BinSpec::marginal(0, ax.origin - 0.5 * ax.spacing(), ax.origin + ax.extent - 0.5 * ax.spacing(), k.bins);
  const auto rho = density(evo->final_state());
  const auto d = compare_to_density(rho, end, bins, k.t_final);
  std::vector<CheckResult> checks{
      detail::make_check("norm_drift", std::abs(norm(evo->final_state()) - 1.0), 1e-10, "<", "absolute"),
      detail::make_check("equivariance_tv", d.total_variation, d.tv_bound, "<=", "3 x expected multinomial TV")};
  for (auto& chk : checks)
    if (!c.skip_checks.count(chk.name)) r.checks.push_back(std::move(chk));

  DataTable hist{"final_histogram", {"x_lo", "x_hi", "ensemble", "density"}, {}};
  auto p = binned_density(rho, bins);
  const double pin = std::accumulate(p.begin(), p.end(), 0.0);
  const auto counts = histogram(g, end, bins);
  for (std::size_t b = 0; b < p.size(); ++b)
    hist.rows.push_back({bins.lo[0] + static_cast<double>(b) * bins.width(0), bins.lo[0] + static_cast<double>(b + 1) * bins.width(0),
                         static_cast<double>(counts[b]) / static_cast<double>(n), p[b] / pin});
  r.tables = {std::move(hist)};
  return r;
}

inline ScenarioReport run_config(const RunConfig& c) {
  if (c.is_custom()) return run_custom(c);
  const Scenario s = build_scenario(c.scenario, c.scenario_parameters());
  RunOptions opt;
  opt.workers = c.workers;
  opt.skip_checks = c.skip_checks;
  return run_scenario(s, c.seed, opt);
}

struct FileEntry {
  std::string path;  ///< relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunManifest {
  nlohmann::json config;
  std::string version = kToolVersion;
  double wall_time = 0.0;
  std::vector<CheckResult> checks;
  std::vector<FileEntry> files;
  int exit_code = kExitPass;
  std::string error;

  std::vector<CheckResult> failures() const {
    std::vector<CheckResult> out;
    for (const auto& c : checks)
      if (!c.pass) out.push_back(c);
    return out;
  }
};

inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json checks = nlohmann::json::array(), failures = nlohmann::json::array(), files = nlohmann::json::array();
  for (const auto& c : m.checks) checks.push_back(check_json(c));
  for (const auto& c : m.failures()) failures.push_back(check_json(c));
  for (const auto& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  nlohmann::json j{{"config", m.config},   {"tool_version", m.version}, {"wall_time_s", m.wall_time}, {"checks", checks},
                   {"failures", failures}, {"files", files},            {"exit_code", m.exit_code}};
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

inline std::vector<FileEntry> manifest_files(const nlohmann::json& manifest) {
  std::vector<FileEntry> out;
  for (const auto& f : manifest.at("files"))
    out.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(), f.at("bytes").get<std::size_t>()});
  return out;
}

inline FileEntry write_data_file(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  std::ofstream os(dir / name, std::ios::binary);
  os << content;
  if (!os) throw Error("cannot write " + (dir / name).string());
  return {name, sha256_hex(content), content.size()};
}

/// Table files in table order; names are <table>.csv or <table>.json.
inline std::vector<FileEntry> write_tables(const std::filesystem::path& dir, const ScenarioReport& r,
                                           const std::string& format) {
  std::vector<FileEntry> out;
  for (const auto& t : r.tables) {
    if (format == "json") {
      out.push_back(write_data_file(dir, t.name + ".json", table_json(t).dump(1) + "\n"));
    } else {
      std::ostringstream os;
      write_table_csv(os, t);
      out.push_back(write_data_file(dir, t.name + ".csv", os.str()));
    }
  }
  return out;
}

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::ofstream os(dir / "manifest.json");
  os << manifest_json(m).dump(2) << '\n';
}

/**
 * Run one configuration and write its outputs. The manifest is written
 * whatever happens; its exit_code follows the CLI contract.
 */
inline RunManifest execute_run(const RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.config = config_json(c);
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  try {
    const ScenarioReport r = run_config(c);
    m.checks = r.checks;
    for (const auto& chk : r.checks)
      if (!std::isfinite(chk.value)) throw NumericalFault("check '" + chk.name + "' produced a non-finite value");
    m.files.push_back(write_data_file(dir, "report.json", report_json(r).dump(2) + "\n"));
    for (auto& f : write_tables(dir, r, c.format)) m.files.push_back(std::move(f));
    m.exit_code = r.pass() ? kExitPass : kExitCheckFailure;
  } catch (const ConfigError& e) {
    m.exit_code = kExitConfigError;
    m.error = e.what();
  } catch (const PreconditionError& e) {
    m.exit_code = kExitConfigError;
    m.error = e.what();
  } catch (const Error& e) {
    m.exit_code = kExitNumericalFault;
    m.error = e.what();
  }
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, m);
  return m;
}

/// Files whose digest or size no longer matches the manifest in `dir`.
inline std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  std::vector<std::string> bad;
  for (const auto& f : manifest_files(manifest)) {
    const auto p = dir / f.path;
    if (!std::filesystem::exists(p)) {
      bad.push_back(f.path);
      continue;
    }
    const std::string content = read_file(p);
    if (content.size() != f.bytes || sha256_hex(content) != f.sha256) bad.push_back(f.path);
  }
  return bad;
}

struct EmitResult {
  std::vector<FileEntry> files;
  std::vector<std::string> mismatches;  ///< regenerated files that differ from the manifest
};

/**
 * Regenerate the plot tables of the run recorded in `manifest_dir` into
 * `out_dir` and compare them with the recorded digests.
 */
inline EmitResult emit_plots(const std::filesystem::path& manifest_dir, const std::filesystem::path& out_dir,
                             std::optional<unsigned> workers = std::nullopt) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("unreadable manifest: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  RunConfig c = config_from_json(manifest.at("config"));
  if (workers) c.workers = *workers;
  std::filesystem::create_directories(out_dir);
  EmitResult out;
  out.files = write_tables(out_dir, run_config(c), c.format);
  const auto recorded = manifest_files(manifest);
  for (const auto& f : out.files) {
    auto it = std::find_if(recorded.begin(), recorded.end(), [&](const FileEntry& r) { return r.path == f.path; });
    if (it == recorded.end() || it->sha256 != f.sha256) out.mismatches.push_back(f.path);
  }
  return out;
}

}  // namespace pilotwave
