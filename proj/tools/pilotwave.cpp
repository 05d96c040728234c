// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

// pilotwave: list scenarios, run one, run the acceptance suite, or
// regenerate plot tables from a manifest.
//
// Exit codes: 0 pass, 2 check failure, 3 config error, 4 numerical fault.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>

#include "pilotwave/acceptance.hpp"

namespace {

using namespace pilotwave;

void print_list(const std::string& format) {
  if (format == "json") {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : scenario_registry()) {
      nlohmann::json params = nlohmann::json::array(), checks = nlohmann::json::array();
      for (const auto& p : s.params)
        params.push_back({{"name", p.name}, {"default", p.value}, {"min", p.lo}, {"max", p.hi}, {"integer", p.integer}, {"help", p.help}});
      for (const auto& c : s.checks) checks.push_back({{"name", c.name}, {"tolerance", c.tolerance}, {"source", c.source}});
      out.push_back({{"name", s.name}, {"summary", s.summary}, {"parameters", params}, {"checks", checks}});
    }
    std::cout << out.dump(2) << '\n';
    return;
  }
  for (const auto& s : scenario_registry()) {
    std::cout << s.name << "\n  " << s.summary << "\n  parameters:\n";
    for (const auto& p : s.params)
      std::cout << "    " << p.name << " = " << p.value << "  [" << p.lo << ", " << p.hi << "]" << (p.integer ? " integer" : "")
                << "  " << p.help << '\n';
    std::cout << "  checks:\n";
    for (const auto& c : s.checks) std::cout << "    " << c.name << ": " << c.tolerance << '\n';
  }
}

void print_failures(int code, const std::vector<CheckResult>& failures, const std::string& error) {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& c : failures) f.push_back(check_json(c));
  nlohmann::json j{{"exit_code", code}, {"failures", f}};
  if (!error.empty()) j["error"] = error;
  std::cerr << j.dump() << '\n';
}

struct Flags {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out;
  std::string format;
};

int do_run(const Flags& f) {
  RunConfig c;
  try {
    if (!f.config.empty()) c = load_config(f.config);
    else if (!f.scenario.empty()) c = parse_config("scenario = \"" + f.scenario + "\"\n");
    else throw ConfigError("run needs --config or --scenario");
    apply_environment(c);
    if (f.seed) c.seed = *f.seed;
    if (f.workers) c.workers = *f.workers;
    if (!f.out.empty()) c.out = f.out;
    if (!f.format.empty()) c.format = f.format;
  } catch (const ConfigError& e) {
    // Still leave a manifest behind, in the directory the run would have used.
    std::string out = f.out;
    if (out.empty()) out = std::getenv("PILOTWAVE_OUT") ? std::getenv("PILOTWAVE_OUT") : RunConfig{}.out;
    RunManifest m;
    m.config = {{"config_file", f.config}, {"scenario", f.scenario}};
    m.exit_code = kExitConfigError;
    m.error = e.what();
    std::filesystem::create_directories(out);
    write_manifest(out, m);
    print_failures(kExitConfigError, {}, e.what());
    return kExitConfigError;
  }
  const RunManifest m = execute_run(c);
  for (const auto& chk : m.checks)
    std::cout << (chk.pass ? "PASS " : "FAIL ") << chk.name << ' ' << chk.value << ' ' << chk.comparison << ' ' << chk.bound << '\n';
  std::cout << "manifest: " << (std::filesystem::path(c.out) / "manifest.json").string() << '\n';
  if (m.exit_code != kExitPass) print_failures(m.exit_code, m.failures(), m.error);
  return m.exit_code;
}

int do_check(const Flags& f) {
  AcceptanceOptions opt;
  opt.workers = f.workers.value_or(1);
  set_warning_sink({});
  const auto results = run_acceptance(opt, [](const CriterionResult& r) { std::cout << format_criterion(r) << std::endl; });
  nlohmann::json out = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& r : results) {
    out.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
    failed += !r.pass;
  }
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    std::ofstream(std::filesystem::path(f.out) / "acceptance.json") << out.dump(2) << '\n';
  }
  if (failed) {
    nlohmann::json j{{"exit_code", kExitCheckFailure}, {"failed_criteria", nlohmann::json::array()}};
    for (const auto& r : results)
      if (!r.pass) j["failed_criteria"].push_back(r.id);
    std::cerr << j.dump() << '\n';
  }
  return failed ? kExitCheckFailure : kExitPass;
}

int do_emit(const std::string& from, const Flags& f) {
  try {
    const auto r = emit_plots(from, f.out.empty() ? from : f.out, f.workers);
    for (const auto& file : r.files) std::cout << file.sha256 << "  " << file.path << '\n';
    if (!r.mismatches.empty()) {
      std::cerr << nlohmann::json{{"exit_code", kExitCheckFailure}, {"digest_mismatches", r.mismatches}}.dump() << '\n';
      return kExitCheckFailure;
    }
    return kExitPass;
  } catch (const ConfigError& e) {
    print_failures(kExitConfigError, {}, e.what());
    return kExitConfigError;
  } catch (const PreconditionError& e) {
    print_failures(kExitConfigError, {}, e.what());
    return kExitConfigError;
  } catch (const Error& e) {
    print_failures(kExitNumericalFault, {}, e.what());
    return kExitNumericalFault;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bohmian trajectory simulations with reproducible checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  Flags f;
  std::string from;

  auto* list = app.add_subcommand("list", "Scenarios with their parameters, defaults and checks");
  list->add_option("--format", f.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* run = app.add_subcommand("run", "Run one configuration and write report, tables and manifest");
  run->add_option("--config", f.config, "configuration file")->check(CLI::ExistingFile);
  run->add_option("--scenario", f.scenario, "scenario with default parameters (instead of --config)");
  run->add_option("--seed", f.seed, "base seed");
  run->add_option("--workers", f.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  run->add_option("--out", f.out, "output directory");
  run->add_option("--format", f.format, "table format")->check(CLI::IsMember({"csv", "json"}));

  auto* check = app.add_subcommand("check", "Run the acceptance suite");
  check->add_option("--workers", f.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  check->add_option("--out", f.out, "directory for acceptance.json");

  auto* emit = app.add_subcommand("emit-plots", "Regenerate plot tables from a run's manifest");
  emit->add_option("--from", from, "directory holding manifest.json")->required()->check(CLI::ExistingDirectory);
  emit->add_option("--out", f.out, "output directory (default: the manifest directory)");
  emit->add_option("--workers", f.workers, "worker threads")->check(CLI::Range(1u, 1024u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (*list) {
    print_list(f.format);
    return kExitPass;
  }
  if (*run) return do_run(f);
  if (*check) return do_check(f);
  return do_emit(from, f);
}
