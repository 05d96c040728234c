// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file acceptance.hpp
 * @brief The fifteen acceptance criteria, shared by the test binary and the
 * `check` subcommand. Each criterion reports pass/fail and its measured
 * values; an exception inside a criterion counts as a failure.
 */

#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pilotwave/jumps.hpp"
#include "pilotwave/runner.hpp"

namespace pilotwave {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  unsigned workers = 1;
  std::filesystem::path scratch;  ///< directory for the determinism runs; empty selects a temp dir
};

namespace acceptance {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

/// Check values of a report as "name=value" pairs plus the overall verdict.
inline std::string summary(const ScenarioReport& r) {
  std::string s;
  for (const auto& c : r.checks) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s%s=%.4g%s", s.empty() ? "" : " ", c.name.c_str(), c.value, c.pass ? "" : "(FAIL)");
    s += buf;
  }
  return s;
}

/// Closed-form free Gaussian, hbar = m = 1, initial width sigma0, at rest at the origin.
inline Complex free_gaussian(double x, double t, double sigma0) {
  const Complex a{1.0, t / (2 * sigma0 * sigma0)};
  return std::pow(2 * kPi * sigma0 * sigma0, -0.25) / std::sqrt(a) * std::exp(-x * x / (4 * sigma0 * sigma0 * a));
}

class Suite {
 public:
  explicit Suite(AcceptanceOptions opt) : opt_(std::move(opt)) {}

  const ScenarioReport& report(const std::string& name) {
    auto it = reports_.find(name);
    if (it != reports_.end()) return it->second;
    RunOptions ro;
    ro.workers = opt_.workers;
    return reports_[name] = run_scenario(build_scenario(name), 1, ro);
  }

  CriterionResult unitarity() {
    const Scenario s = build_scenario("double_slit");
    SpinorField psi = s.psi0;
    SplitOperatorPropagator prop(s.hamiltonian, default_config(s.hamiltonian).dt);
    for (int k = 0; k < 10000; ++k) prop.advance(psi);
    const double drift = std::abs(norm(psi) - 1.0);
    return {1, "Unitarity", drift < 1e-10, fmt("|norm - 1| = %.3g after 1e4 steps (bound 1e-10)", drift)};
  }

  CriterionResult propagator() {
    const Grid g = make_grid({Axis::centered(40, 1024, true)});
    const auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
    const auto psi0 = SpinorField::scalar(g, [](auto q) { return free_gaussian(q[0], 0.0, 1.0); });
    const auto exact = SpinorField::scalar(g, [](auto q) { return free_gaussian(q[0], 2.0, 1.0); });
    const double err = norm(evolve(psi0, h, 2.0, default_config(h)).final_state() - exact);

    // Order of the splitting where it matters: a displaced, moving packet in a harmonic well.
    const Grid w = make_grid({Axis::centered(20, 64, true)});
    auto hw = make_hamiltonian(w, 1, ParticleLayout::single(1));
    hw.potential = harmonic_potential(w, 1.0, hw.particles);
    const auto phi0 = normalize(SpinorField::scalar(w, [](auto q) {
      const double x = q[0] - 2.0;
      return std::exp(Complex{-x * x, q[0]});
    }));
    auto run = [&](double dt) { return evolve(phi0, hw, 1.0, PropagatorConfig{dt, 1000000}).final_state(); };
    const double dt = 0.04;
    const auto ref = run(dt / 64);
    const double ratio = norm(run(dt) - ref) / norm(run(dt / 2) - ref);
    return {2, "Propagator accuracy", err < 1e-6 && std::abs(ratio - 4.0) <= 0.5,
            fmt("L2 error vs closed form %.3g (bound 1e-6); dt-halving error ratio %.3f (4 +- 0.5)", err, ratio)};
  }

  CriterionResult guidance() {
    const Grid g = make_grid({Axis::centered(40, 1024, true)});
    const auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
    auto cfg = default_config(h);
    const auto psi0 = SpinorField::scalar(g, [](auto q) { return free_gaussian(q[0], 0.0, 1.0); });
    const auto evo = std::make_shared<WaveEvolution>(evolve(psi0, h, 2.0, cfg));
    const GuidanceField field(evo);
    const double q = integrate_trajectory(field, Configuration{{1.0}}, 2.0, evo->max_spacing()).final_configuration()[0];
    // Free Gaussian trajectories scale with the width: Q(t) = Q0 sqrt(1 + t^2 / (4 sigma0^4)).
    const double expected = 1.0 * std::sqrt(1.0 + 2.0 * 2.0 / 4.0);
    const double err = std::abs(q - expected);
    return {3, "Guidance oracle", err < 1e-4, fmt("Q(2) = %.8f, sqrt(2) = %.8f, error %.3g (bound 1e-4)", q, expected, err)};
  }

  CriterionResult equivariance() {
    const auto& r = report("double_slit");
    const auto& tv = r.check("equivariance_tv");
    const auto& frozen = r.check("frozen_control_tv");
    return {4, "Equivariance", tv.pass && frozen.pass,
            fmt("TV %.4f (<= 0.03), frozen-velocity control TV %.4f (> 0.1), n = 1e4", tv.value, frozen.value)};
  }

  CriterionResult double_slit() {
    const auto& r = report("double_slit");
    std::size_t fan = 0;
    for (const auto& t : r.tables)
      if (t.name == "trajectory_fan")
        for (const auto& row : t.rows) fan = std::max(fan, static_cast<std::size_t>(row[0]) + 1);
    const bool pass = fan == 80 && r.check("axis_crossings").pass && r.check("fringe_maxima").pass && r.check("slit_passage").pass;
    return {5, "Double slit", pass,
            fmt("fan %g trajectories, axis crossings %g, matched fringe maxima %g, off-slit passages %g", static_cast<double>(fan),
                r.check("axis_crossings").value, r.check("fringe_maxima").value, r.check("slit_passage").value)};
  }

  CriterionResult non_crossing() {
    const auto& r = report("packet_exchange");
    return {6, "Non-crossing", r.pass() && r.parameters.at("n") == 1000, summary(r)};
  }

  CriterionResult measurement() {
    const auto& r = report("pointer_measurement");
    const bool pass = r.check("outcome_frequency").pass && r.check("conditional_fidelity").pass && r.check("branch_overlap").pass &&
                      r.parameters.at("c1_sq") == 0.3 && r.parameters.at("n") == 10000;
    return {7, "Measurement statistics", pass, summary(r)};
  }

  CriterionResult stern_gerlach() {
    const auto& r = report("stern_gerlach");
    return {8, "Stern-Gerlach", r.pass(), summary(r)};
  }

  CriterionResult nonlocality() {
    const auto& r = report("epr_nonlocality");
    return {9, "Nonlocality", r.pass(), summary(r)};
  }

  CriterionResult asymptotic() {
    const auto& r = report("asymptotic_momentum");
    const bool pass = r.pass() && r.parameters.at("t_long") == 50 && r.parameters.at("t_short") == 5 && r.parameters.at("n") == 10000;
    return {10, "Asymptotic momentum", pass, summary(r)};
  }

  CriterionResult jumps() {
    // Rate identity against a fourth-order finite difference of the exact occupations.
    std::mt19937_64 gen(2026);
    std::normal_distribution<double> g;
    double worst = 0.0;
    const double h = 1e-3;
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::MatrixXcd a(8, 8);
      for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j) a(i, j) = {g(gen), g(gen)};
      Sector s0{"0", {"empty"}}, s1{"1", {}};
      for (int k = 1; k < 8; ++k) s1.configs.push_back("c" + std::to_string(k));
      const SectorSpace space({s0, s1}, 0.5 * (a + a.adjoint()));
      Eigen::VectorXcd psi(8);
      for (Eigen::Index i = 0; i < 8; ++i) psi(i) = {g(gen), g(gen)};
      const SectorEvolution ev(space, psi.normalized());
      const double t = 0.37;
      const Eigen::VectorXd fd =
          (-ev.occupations(t + 2 * h) + 8 * ev.occupations(t + h) - 8 * ev.occupations(t - h) + ev.occupations(t - 2 * h)) / (12 * h);
      worst = std::max(worst, (master_equation_rhs(ev.state(t), space) - fd).cwiseAbs().maxCoeff());
    }

    // Two-level Monte Carlo against sin^2 t.
    const auto two = two_level_space();
    Eigen::VectorXcd up(2);
    up << 1.0, 0.0;
    const SectorEvolution ev(two, up);
    const std::size_t n = 10000;
    const auto paths = simulate_paths(ev, two, 0, 1.5, 77, 1.5e-3, n, opt_.workers);
    std::size_t inside = 0;
    double worst_sigma = 0.0;
    for (double t : {0.3, 0.6, 0.9, 1.2, 1.5}) {
      double occupied = 0;
      for (const auto& p : paths) occupied += p.state_at(t) == 1;
      const double p2 = std::pow(std::sin(t), 2);
      const double z = std::abs(occupied / static_cast<double>(n) - p2) / std::sqrt(p2 * (1 - p2) / static_cast<double>(n));
      worst_sigma = std::max(worst_sigma, z);
      inside += z <= 3.0;
    }

    // Hand-derived rate at theta = pi/4: psi = (cos, -i sin) gives 2 tan(theta).
    const double th = kPi / 4;
    Eigen::VectorXcd psi(2);
    psi << std::cos(th), Complex{0, -std::sin(th)};
    const double rate_err = std::abs(jump_rate(psi, two, 0, 1) - 2.0 * std::tan(th));

    const bool pass = worst < 1e-8 && inside == 5 && rate_err < 1e-10;
    return {11, "Jump process", pass,
            fmt("master equation max error %.3g (1e-8); sin^2 worst deviation %.2f sigma (3); rate error %.3g (1e-10)", worst,
                worst_sigma, rate_err)};
  }

  CriterionResult time_reversal() {
    const Scenario s = build_scenario("double_slit");
    const double T = s.param("screen_time");
    const std::size_t stride = s.count("stride");
    auto cfg = default_config(s.hamiltonian);
    cfg.snapshot_stride = stride;
    const auto fwd = std::make_shared<WaveEvolution>(evolve(s.psi0, s.hamiltonian, T, cfg));
    const auto bwd = std::make_shared<WaveEvolution>(evolve(conjugate(fwd->final_state()), s.hamiltonian, T, cfg));
    const GuidanceField ff(fwd, opt_.workers), fb(bwd, opt_.workers);
    const Ensemble start = sample_born(s.psi0, 100, 1, opt_.workers);
    const double rk = fwd->max_spacing() / 4;
    const Ensemble mid = push_forward(ff, start, T, rk, {}, opt_.workers);
    const Ensemble back = push_forward(fb, mid, T, rk, {}, opt_.workers);
    double worst = 0.0;
    for (std::size_t i = 0; i < start.size(); ++i)
      for (std::size_t a = 0; a < 2; ++a) worst = std::max(worst, std::abs(back[i][a] - start[i][a]));
    return {12, "Time reversal", worst < 1e-5, fmt("max |Q_back - Q0| = %.3g over 100 members (bound 1e-5)", worst)};
  }

  CriterionResult permutation() {
    const auto& r = report("permutation_symmetry");
    return {13, "Permutation equivariance", r.pass(), summary(r)};
  }

  CriterionResult classical() {
    const auto& r = report("classical_limit");
    return {14, "Classical limit", r.pass(), summary(r)};
  }

  CriterionResult determinism() {
    namespace fs = std::filesystem;
    fs::path root = opt_.scratch.empty() ? fs::temp_directory_path() / "pilotwave-acceptance" : opt_.scratch;
    fs::remove_all(root);
    std::string detail;
    bool pass = true;
    for (const char* scenario : {"stern_gerlach", "pointer_measurement"}) {
      std::vector<RunManifest> runs;
      for (unsigned workers : {1u, 16u, 1u}) {
        RunConfig c;
        c.scenario = scenario;
        c.n = 2000;
        c.seed = 5;
        c.workers = workers;
        c.out = (root / (std::string(scenario) + "-" + std::to_string(runs.size()))).string();
        runs.push_back(execute_run(c));
        pass = pass && verify_manifest(c.out).empty() && !runs.back().files.empty();
      }
      bool same = true;
      for (std::size_t k = 1; k < runs.size(); ++k) {
        same = same && runs[k].files.size() == runs[0].files.size();
        for (std::size_t f = 0; same && f < runs[0].files.size(); ++f)
          same = runs[k].files[f].path == runs[0].files[f].path && runs[k].files[f].sha256 == runs[0].files[f].sha256;
      }
      pass = pass && same;
      detail += std::string(detail.empty() ? "" : "; ") + scenario + ": " + std::to_string(runs[0].files.size()) + " files " +
                (same ? "identical" : "DIFFER") + " for workers 1, 16, 1";
    }
    fs::remove_all(root);
    return {15, "Determinism", pass, detail};
  }

  using Criterion = CriterionResult (Suite::*)();
  static const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        &Suite::unitarity,    &Suite::propagator,  &Suite::guidance,      &Suite::equivariance, &Suite::double_slit,
        &Suite::non_crossing, &Suite::measurement, &Suite::stern_gerlach, &Suite::nonlocality,  &Suite::asymptotic,
        &Suite::jumps,        &Suite::time_reversal, &Suite::permutation, &Suite::classical,    &Suite::determinism};
    return all;
  }

 private:
  AcceptanceOptions opt_;
  std::map<std::string, ScenarioReport> reports_;
};

}  // namespace acceptance

/// Run every criterion in order; `on_result` sees each one as it finishes.
inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {},
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
  acceptance::Suite suite(opt);
  std::vector<CriterionResult> out;
  int id = 0;
  for (auto criterion : acceptance::Suite::criteria()) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = (suite.*criterion)();
    } catch (const std::exception& e) {
      r = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string format_criterion(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-26s", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str());
  char tail[32];
  std::snprintf(tail, sizeof tail, " (%.1f s)", r.seconds);
  return std::string(head) + r.detail + tail;
}

}  // namespace pilotwave
