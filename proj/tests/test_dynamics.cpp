// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "pilotwave/dynamics.hpp"

using namespace pilotwave;

namespace {

Grid line(double extent, std::size_t points, bool periodic = true) {
  return make_grid({Axis::centered(extent, points, periodic)});
}

SpinorField packet(const Grid& g, double sigma, double x0 = 0.0, double k0 = 0.0) {
  return normalize(SpinorField::scalar(g, [&](std::span<const double> q) {
    const double x = q[0] - x0;
    return std::exp(-x * x / (4 * sigma * sigma)) * std::exp(Complex{0, k0 * q[0]});
  }));
}

/// Free Gaussian of initial width sigma0 at time t, evaluated in closed form.
Complex free_gaussian(double x, double t, double sigma0, double hbar = 1.0, double m = 1.0) {
  const Complex a{1.0, hbar * t / (2 * m * sigma0 * sigma0)};
  return std::pow(2 * kPi * sigma0 * sigma0, -0.25) / std::sqrt(a) * std::exp(-x * x / (4 * sigma0 * sigma0 * a));
}

double l2_distance(const SpinorField& a, const SpinorField& b) { return norm(a - b); }

SpinorField propagate(SpinorField psi, const HamiltonianSpec& h, double dt, int steps) {
  SplitOperatorPropagator prop(h, dt);
  for (int n = 0; n < steps; ++n) prop.advance(psi);
  return psi;
}

}  // namespace

TEST(Coulomb, BareLimitUnitCharges) {
  EXPECT_NEAR(coulomb_energy({{0.0}, {1.0}}, {1, 1}, 1e-9), 1.0, 1e-12);
  EXPECT_NEAR(coulomb_energy({{0.0}, {2.0}}, {1, -1}, 1e-9), -0.5, 1e-12);
}

TEST(Coulomb, Softened) {
  EXPECT_NEAR(coulomb_energy({{0.0}, {1.0}}, {1, 1}, 0.1), 0.995037190209989, 1e-12);
}

TEST(Coulomb, Errors) {
  EXPECT_THROW(coulomb_energy({{0.0}, {1.0}}, {1, 1}, 0.0), PreconditionError);
  EXPECT_THROW(coulomb_energy({{0.0}}, {1}, 0.1), PreconditionError);
}

TEST(Coulomb, GridPotentialSymmetricUnderExchange) {
  const Grid g = make_grid({Axis::centered(10, 16), Axis::centered(10, 16)});
  const auto v = build_coulomb(g, {1, 1}, ParticleLayout::one_per_axis(2), 0.1);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      EXPECT_DOUBLE_EQ(v[i * 16 + j], v[j * 16 + i]);
      EXPECT_TRUE(std::isfinite(v[i * 16 + j]));
    }
}

TEST(Step, PlaneWavePhase) {
  const Grid g = make_grid({Axis{2 * kPi, 64, true, 0}});
  const auto h = make_hamiltonian(g, 1, ParticleLayout::single(1, 1.0));
  const auto psi = SpinorField::scalar(g, [](auto q) { return std::exp(Complex{0, 4 * q[0]}); });
  const double dt = 0.005;
  const auto out = step(psi, h, dt);
  const Complex phase = std::exp(Complex{0, -16.0 * dt / 2});
  for (std::size_t c = 0; c < g.cell_count(); ++c) EXPECT_LT(std::abs(out(c) - phase * psi(c)), 1e-12);
}

TEST(Step, ConstantPotentialGlobalPhase) {
  const Grid g = line(10, 32);
  auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  h.potential.assign(g.cell_count(), 2.5);
  const auto psi = SpinorField::scalar(g, [](auto) { return Complex{1.0}; });
  const double dt = 0.003;
  const auto out = step(psi, h, dt);
  const Complex phase = std::exp(Complex{0, -2.5 * dt});
  for (std::size_t c = 0; c < g.cell_count(); ++c) EXPECT_LT(std::abs(out(c) - phase), 1e-12);
}

TEST(Step, NormConservedOverManySteps) {
  const Grid g = line(20, 128);
  auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  h.potential = harmonic_potential(g, 1.0, h.particles);
  auto psi = packet(g, 1.0, 1.5, 2.0);
  SplitOperatorPropagator prop(h, default_config(h).dt);
  for (int n = 0; n < 10000; ++n) prop.advance(psi);
  EXPECT_LT(std::abs(norm(psi) - 1.0), 1e-10);
}

TEST(Step, TimeStepBound) {
  const Grid g = line(10, 64);
  const auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  EXPECT_THROW(SplitOperatorPropagator(h, stability_bound(h) * 1.01), PreconditionError);
  EXPECT_THROW(SplitOperatorPropagator(h, 0.0), PreconditionError);
  EXPECT_NO_THROW(SplitOperatorPropagator(h, -0.5 * stability_bound(h)));
}

TEST(Step, NonFiniteInputRaisesNumericalFault) {
  const Grid g = line(10, 64);
  const auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  SpinorField psi(g);
  psi(5) = Complex{std::nan(""), 0.0};
  EXPECT_THROW(step(psi, h, 0.001), NumericalFault);
}

TEST(Hamiltonian, NonHermitianCouplingRejected) {
  const Grid g = line(10, 8);
  auto h = make_hamiltonian(g, 2, ParticleLayout::single(1));
  h.spin_coupling = uniform_spin_coupling(g, {1.0, Complex{0, 1}, Complex{0, 1}, 0.0});
  EXPECT_THROW(h.validate(), PreconditionError);
}

TEST(Hamiltonian, MatrixExponentialAgreesWithEigenDecomposition) {
  const std::size_t d = 4;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(d, d);
  a = (a + a.adjoint()).eval() * 1.7;
  std::vector<Complex> flat(d * d), out(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = a(i, j);
  const double tau = 0.9;
  detail::hermitian_exp(flat.data(), d, tau, out.data());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  Eigen::VectorXcd phases = (es.eigenvalues().cast<Complex>() * Complex{0, -tau}).array().exp();
  Eigen::MatrixXcd ref = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) EXPECT_LT(std::abs(out[i * d + j] - ref(i, j)), 1e-12);

  // The 2 x 2 closed form against the same oracle.
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Random(2, 2);
  b = (b + b.adjoint()).eval();
  std::vector<Complex> fb{b(0, 0), b(0, 1), b(1, 0), b(1, 1)}, ob(4);
  detail::hermitian_exp(fb.data(), 2, tau, ob.data());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eb(b);
  Eigen::VectorXcd pb = (eb.eigenvalues().cast<Complex>() * Complex{0, -tau}).array().exp();
  Eigen::MatrixXcd rb = eb.eigenvectors() * pb.asDiagonal() * eb.eigenvectors().adjoint();
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_LT(std::abs(ob[i * 2 + j] - rb(i, j)), 1e-13);
}

TEST(Evolve, FreeGaussianWidth) {
  const Grid g = line(40, 1024);
  const auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  const auto evo = evolve(packet(g, 1.0), h, 2.0, default_config(h));
  const auto rho = density(evo.final_state());
  double m2 = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double x = g.axis(0).coordinate(c);
    m2 += x * x * rho.values[c];
  }
  m2 *= g.cell_volume();
  EXPECT_NEAR(std::sqrt(m2), std::sqrt(2.0), 1e-6);
  EXPECT_DOUBLE_EQ(evo.t_end(), 2.0);
  EXPECT_TRUE(evo.free_evolution());
}

TEST(Evolve, FreeGaussianMatchesClosedForm) {
  const Grid g = line(40, 1024);
  const auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  const auto evo = evolve(packet(g, 1.0), h, 2.0, default_config(h));
  const auto exact = SpinorField::scalar(g, [](auto q) { return free_gaussian(q[0], 2.0, 1.0); });
  EXPECT_LT(l2_distance(evo.final_state(), exact), 1e-6);
}

TEST(Evolve, CoherentStateReturnsAfterOnePeriod) {
  const Grid g = line(20, 256);
  auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  h.potential = harmonic_potential(g, 1.0, h.particles);
  const auto psi0 = packet(g, std::sqrt(0.5), 2.0);
  const auto evo = evolve(psi0, h, 2 * kPi, default_config(h));
  EXPECT_GT(std::abs(inner_product(evo.final_state(), psi0)), 1 - 1e-6);
}

TEST(Evolve, RabiOscillation) {
  const Grid g = line(10, 8);
  auto h = make_hamiltonian(g, 2, ParticleLayout::single(1));
  const double coupling = 1.3;
  h.spin_coupling = uniform_spin_coupling(g, {0.0, coupling, coupling, 0.0});
  const auto psi0 = normalize(SpinorField::sample(g, 2, [](auto, std::span<Complex> s) { s[0] = 1.0; }));
  PropagatorConfig cfg{0.01, 1};
  const auto evo = evolve(psi0, h, 2.0, cfg);
  for (std::size_t i = 0; i < evo.size(); ++i) {
    const auto& psi = evo.snapshot(i);
    double down = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) down += std::norm(psi(c, 1));
    down *= g.cell_volume();
    const double s = std::sin(coupling * evo.times()[i]);
    EXPECT_NEAR(down, s * s, 1e-8);
  }
}

TEST(Evolve, SnapshotSchedule) {
  const Grid g = line(10, 64);
  const auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  const auto evo = evolve(packet(g, 1.0), h, 1.0, PropagatorConfig{0.01, 25});
  ASSERT_EQ(evo.size(), 5u);
  EXPECT_DOUBLE_EQ(evo.times()[1], 0.25);
  EXPECT_DOUBLE_EQ(evo.t_end(), 1.0);
  EXPECT_THROW(evolve(packet(g, 1.0), h, 0.0, PropagatorConfig{0.01, 1}), PreconditionError);
}

TEST(Evolve, StrangSecondOrder) {
  const Grid g = line(20, 64);
  auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  h.potential = harmonic_potential(g, 1.0, h.particles);
  const auto psi0 = packet(g, std::sqrt(0.5), 2.0, 1.0);
  auto run = [&](double dt) { return evolve(psi0, h, 1.0, PropagatorConfig{dt, 1000000}).final_state(); };
  const double dt = 0.04;
  const auto ref = run(dt / 64);
  const double e1 = l2_distance(run(dt), ref);
  const double e2 = l2_distance(run(dt / 2), ref);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(TimeReverse, InvolutionAndDensity) {
  const Grid g = line(20, 128);
  const auto psi = packet(g, 1.0, 1.0, 3.0);
  const auto twice = time_reverse(time_reverse(psi));
  for (std::size_t c = 0; c < g.cell_count(); ++c) EXPECT_EQ(twice(c), psi(c));
  const auto r1 = density(psi), r2 = density(time_reverse(psi));
  EXPECT_EQ(r1.values, r2.values);
}

TEST(TimeReverse, ConjugationReversesEvolution) {
  const Grid g = line(30, 256);
  auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  h.potential = harmonic_potential(g, 0.5, h.particles);
  const auto psi = packet(g, 1.0, 1.0, 2.0);
  const double dt = default_config(h).dt;
  const int steps = 1000;
  // Conjugating the Schroedinger equation maps evolution by +t onto evolution by -t.
  const auto lhs = propagate(time_reverse(psi), h, dt, steps);
  const auto rhs = time_reverse(propagate(psi, h, -dt, steps));
  EXPECT_LT(l2_distance(lhs, rhs), 1e-10);
  // Forward, conjugate, forward, conjugate is the identity.
  const auto mid = propagate(psi, h, dt, steps);
  const auto back = time_reverse(propagate(time_reverse(mid), h, dt, steps));
  EXPECT_LT(l2_distance(back, psi), 1e-8);
}

TEST(SpinCoupling, DiagonalCouplingDecouplesComponents) {
  const Grid g = line(30, 256);
  auto h2 = make_hamiltonian(g, 2, ParticleLayout::single(1));
  h2.spin_coupling = stern_gerlach_coupling(g, 0.8);
  const auto f = packet(g, 1.0);
  SpinorField spinor(g, 2);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    spinor(c, 0) = std::sqrt(0.6) * f(c);
    spinor(c, 1) = std::sqrt(0.4) * f(c);
  }
  const PropagatorConfig cfg{0.005, 1000};
  const auto coupled = evolve(spinor, h2, 1.0, cfg).final_state();
  for (int s = 0; s < 2; ++s) {
    auto h1 = make_hamiltonian(g, 1, ParticleLayout::single(1));
    h1.potential = linear_potential(g, s == 0 ? -0.8 : 0.8);
    SpinorField comp(g);
    for (std::size_t c = 0; c < g.cell_count(); ++c) comp(c) = spinor(c, s);
    const auto alone = evolve(comp, h1, 1.0, cfg).final_state();
    for (std::size_t c = 0; c < g.cell_count(); ++c) EXPECT_LT(std::abs(alone(c) - coupled(c, s)), 1e-10);
  }
}

TEST(PotentialSpec, BuiltInForms) {
  const Grid g = line(10, 64);
  auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  apply_potential_spec(h, "harmonic(2)");
  EXPECT_DOUBLE_EQ(h.potential[0], 0.5 * 4 * 25);
  apply_potential_spec(h, "barrier(3, 1, 0)");
  EXPECT_DOUBLE_EQ(h.potential[32], 3.0);
  EXPECT_DOUBLE_EQ(h.potential[0], 0.0);
  apply_potential_spec(h, "free");
  EXPECT_TRUE(h.is_free());
  apply_potential_spec(h, "linear_gradient(0.5)");
  EXPECT_DOUBLE_EQ(h.potential[0], -2.5);
  EXPECT_THROW(apply_potential_spec(h, "quartic(1)"), ConfigError);
  EXPECT_THROW(apply_potential_spec(h, "harmonic(x)"), ConfigError);
  EXPECT_THROW(apply_potential_spec(h, "harmonic(1, 2)"), ConfigError);

  auto h2 = make_hamiltonian(g, 2, ParticleLayout::single(1));
  apply_potential_spec(h2, "linear_gradient(0.5)");
  EXPECT_TRUE(h2.has_spin_coupling());
  EXPECT_DOUBLE_EQ(h2.spin_coupling[0].real(), 2.5);

  const Grid g2 = make_grid({Axis::centered(10, 16), Axis::centered(10, 16)});
  auto hc = make_hamiltonian(g2, 1, ParticleLayout::one_per_axis(2));
  apply_potential_spec(hc, "coulomb(1:-1, 0.5)");
  EXPECT_NEAR(hc.potential[0], -1.0 / 0.5, 1e-12);
}

TEST(PotentialSpec, TabulatedFile) {
  const Grid g = line(10, 16);
  const auto path = (std::filesystem::temp_directory_path() / "pilotwave_potential_test.pwf").string();
  const auto table = SpinorField::scalar(g, [](auto q) { return Complex{q[0] * q[0]}; });
  save_field(path, table);
  auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  apply_potential_spec(h, "file(" + path + ")");
  EXPECT_FLOAT_EQ(static_cast<float>(h.potential[3]), static_cast<float>(table(3).real()));
  std::filesystem::remove(path);
  const Grid other = line(10, 32);
  auto wrong = make_hamiltonian(other, 1, ParticleLayout::single(1));
  save_field(path, table);
  EXPECT_THROW(apply_potential_spec(wrong, "file(" + path + ")"), ConfigError);
  std::filesystem::remove(path);
}
