// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "pilotwave/field_io.hpp"
#include "pilotwave/runner.hpp"

using namespace pilotwave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pilotwave_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PILOTWAVE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class QuietWarnings : public ::testing::Environment {
 public:
  void SetUp() override { set_warning_sink({}); }
};
const auto* const kQuiet = ::testing::AddGlobalTestEnvironment(new QuietWarnings);

}  // namespace

TEST(ParseConfig, MinimalUsesDefaults) {
  const RunConfig c = parse_config("scenario = \"double_slit\"\n");
  EXPECT_EQ(c.scenario, "double_slit");
  EXPECT_FALSE(c.n.has_value());
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c.workers, 1u);
  EXPECT_EQ(c.format, "csv");
  const auto p = resolve_parameters(scenario_info("double_slit"), c.scenario_parameters());
  EXPECT_EQ(p.at("n"), 10000.0);
}

TEST(ParseConfig, RunSectionAndOverrides) {
  const RunConfig c = parse_config(
      "# comment\n[run]\nscenario = \"double_slit\"\nseed = 42\nn = 500\nworkers = 4\nformat = \"json\"\n"
      "skip_checks = [\"frozen_control_tv\"]\n[double_slit]\nslit_separation = 7.5  # trailing\n");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(*c.n, 500u);
  EXPECT_EQ(c.workers, 4u);
  EXPECT_EQ(c.format, "json");
  EXPECT_EQ(c.skip_checks, std::set<std::string>{"frozen_control_tv"});
  EXPECT_EQ(c.overrides.at("slit_separation"), 7.5);
  EXPECT_EQ(config_json(c)["overrides"]["slit_separation"], 7.5);
}

TEST(ParseConfig, OverridesForOtherScenariosIgnored) {
  const RunConfig c = parse_config("scenario = \"epr_nonlocality\"\n[double_slit]\nslit_separation = 7.5\n");
  EXPECT_TRUE(c.overrides.empty());
}

TEST(ParseConfig, ErrorsNameLineAndKey) {
  const std::string workers = config_error("scenario = \"double_slit\"\nworkers = 0\n");
  EXPECT_NE(workers.find("line 2"), std::string::npos) << workers;
  EXPECT_NE(workers.find("workers"), std::string::npos) << workers;

  const std::string unknown = config_error("scenario = \"double_slit\"\n\ncolour = 3\n");
  EXPECT_NE(unknown.find("line 3"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("colour"), std::string::npos) << unknown;

  const std::string range = config_error("scenario = \"double_slit\"\n[double_slit]\nslit_separation = -1\n");
  EXPECT_NE(range.find("line 3"), std::string::npos) << range;
  EXPECT_NE(range.find("slit_separation"), std::string::npos) << range;
}

TEST(ParseConfig, RejectsMalformedInput) {
  for (const char* text : {
           "",                                                              // no scenario
           "scenario = \"nope\"\n",                                         // unknown scenario
           "scenario = double_slit\n",                                      // unquoted string
           "scenario = \"double_slit\"\nseed = 1.5\n",                      // non-integer seed
           "scenario = \"double_slit\"\nseed = 1\nseed = 2\n",              // duplicate key
           "scenario = \"double_slit\"\n[nowhere]\n",                       // unknown section
           "scenario = \"double_slit\"\nformat = \"xml\"\n",                // bad format
           "scenario = \"double_slit\"\nskip_checks = [\"no_such\"]\n",     // unknown check
           "scenario = \"double_slit\"\n[double_slit]\nn = 10\n",           // n belongs to [run]
           "scenario = \"double_slit\"\n[double_slit]\npoints = 300\n",     // not a power of two
           "scenario = \"epr_nonlocality\"\nn = 10\n",                      // no ensemble
           "scenario = \"custom\"\n",                                       // psi0 missing
           "scenario = \"custom\"\n[custom]\npsi0 = \"missing.pwf\"\n",     // psi0 not on disk
           "scenario = \"double_slit\"\nthis line has no equals\n",
       }) {
    EXPECT_THROW(parse_config(text), ConfigError) << text;
  }
}

TEST(ApplyEnvironment, OverridesFileValues) {
  RunConfig c = parse_config("scenario = \"double_slit\"\nseed = 1\n");
  const std::map<std::string, std::string> env{
      {"PILOTWAVE_SEED", "9"}, {"PILOTWAVE_N", "300"}, {"PILOTWAVE_WORKERS", "3"}, {"PILOTWAVE_OUT", "elsewhere"}, {"PILOTWAVE_FORMAT", "json"}};
  apply_environment(c, [&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(*c.n, 300u);
  EXPECT_EQ(c.workers, 3u);
  EXPECT_EQ(c.out, "elsewhere");
  EXPECT_EQ(c.format, "json");
}

TEST(ApplyEnvironment, RejectsBadValues) {
  RunConfig c = parse_config("scenario = \"double_slit\"\n");
  EXPECT_THROW(apply_environment(c, [](const char* n) -> const char* { return std::string(n) == "PILOTWAVE_WORKERS" ? "0" : nullptr; }),
               ConfigError);
  EXPECT_THROW(apply_environment(c, [](const char* n) -> const char* { return std::string(n) == "PILOTWAVE_SEED" ? "x1" : nullptr; }),
               ConfigError);
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ConfigJson, RoundTrips) {
  const RunConfig c = parse_config("scenario = \"stern_gerlach\"\nseed = 7\nn = 123\n[stern_gerlach]\nc_up_sq = 0.25\n");
  const RunConfig back = config_from_json(config_json(c));
  EXPECT_EQ(config_json(back), config_json(c));
}

TEST(ExecuteRun, DeterministicAndVerifiable) {
  RunConfig c = parse_config("scenario = \"stern_gerlach\"\nseed = 11\nn = 400\n");
  c.out = scratch("det_a").string();
  const RunManifest a = execute_run(c);
  c.out = scratch("det_b").string();
  c.workers = 3;
  const RunManifest b = execute_run(c);
  ASSERT_EQ(a.exit_code, kExitPass) << a.error;
  ASSERT_EQ(b.exit_code, kExitPass) << b.error;
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    EXPECT_EQ(a.files[i].path, b.files[i].path);
    EXPECT_EQ(a.files[i].sha256, b.files[i].sha256) << a.files[i].path;
  }
  EXPECT_TRUE(verify_manifest(c.out).empty());

  // Tampering is detected.
  std::ofstream(fs::path(c.out) / a.files.back().path, std::ios::app) << "x";
  EXPECT_EQ(verify_manifest(c.out), std::vector<std::string>{a.files.back().path});
}

TEST(ExecuteRun, ManifestContents) {
  RunConfig c = parse_config("scenario = \"epr_nonlocality\"\n[epr_nonlocality]\nq2 = -1.5\n");
  c.out = scratch("manifest").string();
  const RunManifest m = execute_run(c);
  ASSERT_EQ(m.exit_code, kExitPass) << m.error;
  const auto j = nlohmann::json::parse(read_file(fs::path(c.out) / "manifest.json"));
  EXPECT_EQ(j["config"]["scenario"], "epr_nonlocality");
  EXPECT_EQ(j["config"]["overrides"]["q2"], -1.5);
  EXPECT_EQ(j["tool_version"], kToolVersion);
  EXPECT_EQ(j["exit_code"], 0);
  EXPECT_TRUE(j["failures"].empty());
  EXPECT_GE(j["wall_time_s"].get<double>(), 0.0);
  EXPECT_EQ(j["files"][0]["path"], "report.json");
  const auto report = nlohmann::json::parse(read_file(fs::path(c.out) / "report.json"));
  EXPECT_TRUE(report["pass"].get<bool>());
}

TEST(ExecuteRun, CheckFailureExitsTwo) {
  RunConfig c = parse_config("scenario = \"epr_nonlocality\"\n[epr_nonlocality]\nq2 = 1\n");
  c.out = scratch("fail").string();
  const RunManifest m = execute_run(c);
  EXPECT_EQ(m.exit_code, kExitCheckFailure);
  ASSERT_EQ(m.failures().size(), 1u);
  EXPECT_EQ(m.failures()[0].name, "entangled_difference");
  const auto j = nlohmann::json::parse(read_file(fs::path(c.out) / "manifest.json"));
  EXPECT_EQ(j["exit_code"], 2);
  EXPECT_EQ(j["failures"][0]["name"], "entangled_difference");
}

TEST(ExecuteRun, UnreadableFieldExitsThree) {
  const fs::path dir = scratch("badfield");
  write_text(dir / "psi.pwf", "not a field");
  RunConfig c = load_config([&] {
    write_text(dir / "run.toml", "scenario = \"custom\"\n[custom]\npsi0 = \"psi.pwf\"\n");
    return dir / "run.toml";
  }());
  c.out = (dir / "out").string();
  const RunManifest m = execute_run(c);
  EXPECT_EQ(m.exit_code, kExitConfigError);
  EXPECT_FALSE(m.error.empty());
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(ExecuteRun, CustomFieldRun) {
  const fs::path dir = scratch("custom");
  const Grid g = make_grid({Axis::centered(20, 128)});
  save_field((dir / "psi.pwf").string(), normalize(SpinorField::scalar(g, [](std::span<const double> q) {
               return std::exp(-(q[0] - 1) * (q[0] - 1) / 4.0) * std::exp(Complex{0, 0.5 * q[0]});
             })));
  write_text(dir / "run.toml",
             "scenario = \"custom\"\nseed = 4\nn = 4000\n[custom]\npsi0 = \"psi.pwf\"\npotential = \"harmonic(1)\"\n"
             "t_final = 1.5\nbins = 32\n");
  RunConfig c = load_config(dir / "run.toml");
  EXPECT_TRUE(fs::path(c.custom.psi0_file).is_absolute() || fs::exists(c.custom.psi0_file));
  c.out = (dir / "out").string();
  const RunManifest m = execute_run(c);
  ASSERT_EQ(m.exit_code, kExitPass) << m.error;
  ASSERT_EQ(m.checks.size(), 2u);
  EXPECT_EQ(m.checks[0].name, "norm_drift");
  EXPECT_EQ(m.checks[1].name, "equivariance_tv");
  EXPECT_TRUE(fs::exists(dir / "out" / "final_histogram.csv"));
  EXPECT_TRUE(verify_manifest(c.out).empty());
}

TEST(EmitPlots, ReproducesRecordedTables) {
  RunConfig c = parse_config("scenario = \"packet_exchange\"\nn = 200\nformat = \"json\"\n");
  c.out = scratch("emit_src").string();
  const RunManifest m = execute_run(c);
  ASSERT_NE(m.exit_code, kExitConfigError) << m.error;
  const fs::path out = scratch("emit_out");
  const EmitResult r = emit_plots(c.out, out, 2u);
  EXPECT_TRUE(r.mismatches.empty());
  EXPECT_EQ(r.files.size() + 1, m.files.size());  // everything except report.json
  for (const auto& f : r.files) EXPECT_EQ(sha256_hex(read_file(out / f.path)), f.sha256);
}

TEST(EmitPlots, MissingManifestIsConfigError) { EXPECT_THROW(emit_plots(scratch("empty"), scratch("empty_out")), ConfigError); }

TEST(Binary, ListShowsEveryScenario) {
  const fs::path dir = scratch("bin_list");
  ASSERT_EQ(run_cli("list --format json", dir / "log"), 0);
  const auto j = nlohmann::json::parse(read_file(dir / "log"));
  std::set<std::string> names;
  for (const auto& s : j) names.insert(s["name"].get<std::string>());
  EXPECT_EQ(names, (std::set<std::string>{"double_slit", "packet_exchange", "stern_gerlach", "pointer_measurement", "epr_nonlocality",
                                          "asymptotic_momentum", "classical_limit", "permutation_symmetry"}));
}

TEST(Binary, ExitCodes) {
  const fs::path dir = scratch("bin_codes");
  write_text(dir / "bad.toml", "scenario = \"epr_nonlocality\"\nworkers = 0\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.toml").string() + " --out " + (dir / "o_bad").string(), dir / "log"), 3);
  EXPECT_NE(read_file(dir / "log").find("workers"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "o_bad" / "manifest.json"));

  write_text(dir / "fail.toml", "scenario = \"epr_nonlocality\"\n[epr_nonlocality]\nq2 = 1\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "fail.toml").string() + " --out " + (dir / "o_fail").string(), dir / "log"), 2);
  EXPECT_NE(read_file(dir / "log").find("entangled_difference"), std::string::npos);

  EXPECT_EQ(run_cli("run --scenario epr_nonlocality --out " + (dir / "o_ok").string(), dir / "log"), 0);
  EXPECT_EQ(run_cli("emit-plots --from " + (dir / "o_ok").string() + " --out " + (dir / "o_emit").string(), dir / "log"), 0);
  EXPECT_EQ(run_cli("frobnicate", dir / "log"), 3);
  EXPECT_EQ(run_cli("run --scenario no_such_thing --out " + (dir / "o_none").string(), dir / "log"), 3);
}

TEST(Binary, FlagsOverrideEnvironment) {
  const fs::path dir = scratch("bin_env");
  const std::string cmd = "PILOTWAVE_SEED=5 PILOTWAVE_FORMAT=json " + std::string(PILOTWAVE_CLI) +
                          " run --scenario epr_nonlocality --seed 6 --out " + (dir / "o").string() + " > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const auto j = nlohmann::json::parse(read_file(dir / "o" / "manifest.json"));
  EXPECT_EQ(j["config"]["seed"], 6);
  EXPECT_EQ(j["config"]["format"], "json");
}
