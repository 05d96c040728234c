// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "pilotwave/ensembles.hpp"

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

std::shared_ptr<WaveEvolution> free_run(const Grid& g, const SpinorField& psi0, double t, std::size_t stride) {
  const auto h = make_hamiltonian(g, 1, ParticleLayout::single(g.rank()));
  auto cfg = default_config(h);
  cfg.snapshot_stride = stride;
  return std::make_shared<WaveEvolution>(evolve(psi0, h, t, cfg));
}

double sample_sd(const Ensemble& e, std::size_t axis = 0) {
  double m = 0, s = 0;
  for (const auto& q : e.members) m += q[axis];
  m /= static_cast<double>(e.size());
  for (const auto& q : e.members) s += (q[axis] - m) * (q[axis] - m);
  return std::sqrt(s / static_cast<double>(e.size() - 1));
}

}  // namespace

TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(CounterRng::philox({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(CounterRng::philox({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(CounterRng::philox({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreDistinctAndRepeatable) {
  CounterRng a(7, stream_label("born"), 3), b(7, stream_label("born"), 3), c(7, stream_label("born"), 4),
      d(8, stream_label("born"), 3);
  const double x = a.uniform();
  EXPECT_EQ(x, b.uniform());
  EXPECT_NE(x, c.uniform());
  EXPECT_NE(x, d.uniform());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(SampleBorn, DegenerateDensity) {
  const Grid g = line(8, 16);
  SpinorField psi(g);
  psi(5) = 1.0;
  const auto e = sample_born(normalize(psi), 500, 1);
  const double x5 = g.axis(0).coordinate(5), h = g.axis(0).spacing();
  for (const auto& q : e.members) {
    EXPECT_GE(q[0], x5 - h / 2);
    EXPECT_LT(q[0], x5 + h / 2);
  }
}

TEST(SampleBorn, TwoCellBinomial) {
  const Grid g = line(8, 8);
  SpinorField psi(g);
  psi(2) = std::sqrt(0.25);
  psi(6) = std::sqrt(0.75);
  const std::size_t n = 10000;
  const auto e = sample_born(psi, n, 42);
  const double x6 = g.axis(0).coordinate(6);
  std::size_t heavy = 0;
  for (const auto& q : e.members) heavy += std::abs(q[0] - x6) < 0.5 ? 1 : 0;
  const double sd = std::sqrt(n * 0.25 * 0.75);
  EXPECT_NEAR(static_cast<double>(heavy), 7500.0, 3 * sd);
}

TEST(SampleBorn, UniformPassesChiSquare) {
  const Grid g = make_grid({Axis{64, 64, true, 0}});
  const auto psi = normalize(SpinorField::scalar(g, [](auto) { return Complex{1.0}; }));
  const std::size_t n = 100000;
  const auto e = sample_born(psi, n, 2024);
  std::vector<std::size_t> counts(64, 0);
  for (const auto& q : e.members) ++counts[static_cast<std::size_t>(std::floor(q[0] + 0.5)) % 64];
  const double expect = n / 64.0;
  double chi2 = 0.0;
  for (auto c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // 99th percentile of chi-square with 63 degrees of freedom.
  EXPECT_LT(chi2, 92.010);
}

TEST(SampleBorn, IndependentOfWorkerCount) {
  const Grid g = make_grid({Axis::centered(10, 32), Axis::centered(10, 32)});
  const auto psi = normalize(SpinorField::scalar(g, [](auto q) { return Complex{std::exp(-(q[0] * q[0] + q[1] * q[1]) / 4)}; }));
  const auto a = sample_born(psi, 5000, 9, 1);
  const auto b = sample_born(psi, 5000, 9, 4);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  const auto c = sample_born(psi, 5000, 10, 1);
  EXPECT_NE(a[0], c[0]);
}

TEST(PushForward, ZeroDurationIsIdentity) {
  const Grid g = line(40, 256);
  const auto evo = free_run(g, packet(g, 1.0), 1.0, 10);
  const GuidanceField field(evo);
  const auto e = sample_born(evo->snapshot(0), 200, 3);
  const auto p = push_forward(field, e, 0.0, evo->max_spacing());
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_EQ(p[i], e[i]);
  EXPECT_EQ(p.seed, e.seed);
}

TEST(PushForward, StationaryStateLeavesEnsemble) {
  const Grid g = line(20, 256);
  auto h = make_hamiltonian(g, 1, ParticleLayout::single(1));
  h.potential = harmonic_potential(g, 1.0, h.particles);
  const auto ground = normalize(SpinorField::scalar(g, [](auto q) { return Complex{std::exp(-q[0] * q[0] / 2)}; }));
  const auto evo = std::make_shared<WaveEvolution>(evolve(ground, h, 1.0, PropagatorConfig{default_config(h).dt / 4, 200}));
  const GuidanceField field(evo);
  const auto e = sample_born(ground, 300, 5);
  const auto p = push_forward(field, e, 1.0, evo->max_spacing());
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(p[i][0], e[i][0], 1e-8);
}

TEST(PushForward, FreeGaussianWidth) {
  const Grid g = line(40, 1024);
  const auto evo = free_run(g, packet(g, 1.0), 2.0, 10);
  const GuidanceField field(evo);
  const std::size_t n = 4000;
  const auto p = push_forward(field, sample_born(evo->snapshot(0), n, 77), 2.0, evo->max_spacing());
  EXPECT_NEAR(sample_sd(p), std::sqrt(2.0), 3 / std::sqrt(2.0 * n) * std::sqrt(2.0));
}

TEST(Binning, SmoothGaussianBinningError) {
  const Grid g = line(20, 1024);
  const auto rho = density(packet(g, 1.0));
  const auto bins = BinSpec::marginal(0, -5, 5, 64);
  const auto p = binned_density(rho, bins);
  // Exact bin probabilities of N(0, 1) from the error function.
  double tv = 0.0;
  for (std::size_t b = 0; b < 64; ++b) {
    const double a0 = -5 + b * bins.width(0), a1 = a0 + bins.width(0);
    const double exact = 0.5 * (std::erf(a1 / std::sqrt(2.0)) - std::erf(a0 / std::sqrt(2.0)));
    tv += std::abs(p[b] - exact);
  }
  EXPECT_LT(0.5 * tv, 0.01);
}

TEST(Binning, MassConservedOnPeriodicSeam) {
  const Grid g = make_grid({Axis{10, 32, true, 0}});
  const auto psi = normalize(SpinorField::scalar(g, [](auto q) { return Complex{1.0 + std::cos(q[0])}; }));
  const auto p = binned_density(density(psi), BinSpec::marginal(0, -2.0, 8.0, 7));
  double s = 0;
  for (double v : p) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Equivariance, FreeGaussianPassesAndFrozenControlFails) {
  const Grid g = line(40, 1024);
  const auto evo = free_run(g, packet(g, 1.0), 2.0, 10);
  const GuidanceField field(evo);
  const auto bins = BinSpec::marginal(0, -8, 8, 64);
  const std::vector<double> times{0.0, 1.0, 2.0};
  const auto reports = equivariance_check(field, 4000, times, bins, 11);
  ASSERT_EQ(reports.size(), 3u);
  for (const auto& r : reports) {
    EXPECT_TRUE(r.pass) << "t = " << r.time << " TV " << r.total_variation << " bound " << r.tv_bound;
    EXPECT_GE(r.total_variation, 0.0);
    EXPECT_LE(r.total_variation, 1.0);
    EXPECT_LE(r.ks_per_axis[0], 1.0);
  }
  EquivarianceOptions frozen;
  frozen.frozen = true;
  const std::vector<double> end{2.0};
  const auto bad = equivariance_check(field, 4000, end, bins, 11, frozen);
  EXPECT_GT(bad[0].total_variation, 0.1);
  EXPECT_FALSE(bad[0].pass);
}

TEST(Equivariance, TimeMustBeASnapshot) {
  const Grid g = line(40, 256);
  const auto evo = free_run(g, packet(g, 1.0), 1.0, 10);
  const GuidanceField field(evo);
  const std::vector<double> t{0.123456};
  EXPECT_THROW(equivariance_check(field, 10, t, BinSpec::grid_default(g), 1), PreconditionError);
}

TEST(Typicality, Basics) {
  const Grid g = line(20, 256);
  const auto psi = packet(g, 1.0);
  EXPECT_DOUBLE_EQ(typicality_measure(psi, [](const Configuration&) { return true; }), 1.0);
  EXPECT_NEAR(typicality_measure(psi, [](const Configuration& q) { return q[0] > 0; }, 2), 0.5, 1e-12);
  auto in_band = [](const Configuration& q) { return q[0] > -0.3 && q[0] < 1.7; };
  const double s = typicality_measure(psi, in_band, 3);
  const double sc = typicality_measure(psi, [&](const Configuration& q) { return !in_band(q); }, 3);
  EXPECT_NEAR(s + sc, 1.0, 1e-12);
  EXPECT_LE(typicality_measure(psi, [](const Configuration& q) { return q[0] > 1; }),
            typicality_measure(psi, [](const Configuration& q) { return q[0] > 0.5; }));
}

TEST(Typicality, MatchesDirectCellSum) {
  const Grid g = make_grid({Axis::centered(10, 64), Axis::centered(10, 64)});
  const auto psi = normalize(SpinorField::scalar(
      g, [](auto q) { return std::exp(-(q[0] * q[0] + (q[1] - 1) * (q[1] - 1)) / 3) * std::exp(Complex{0, q[0]}); }));
  auto band = [](const Configuration& q) { return std::abs(q[1]) < 0.9; };
  double brute = 0.0, total = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double r = std::norm(psi(c));
    total += r;
    if (band(Configuration{g.cell_coordinates(c)})) brute += r;
  }
  EXPECT_NEAR(typicality_measure(psi, band), brute / total, 1e-10);
}

namespace {

Grid plane() { return make_grid({Axis::centered(16, 64), Axis::centered(16, 64)}); }

double gauss(double x, double c, double s) { return std::exp(-(x - c) * (x - c) / (4 * s * s)); }

}  // namespace

TEST(ConditionalWaveFunction, ProductStateIsYIndependent) {
  const Grid g = plane();
  const auto psi = normalize(SpinorField::scalar(
      g, [](auto q) { return gauss(q[0], 1, 1) * std::exp(Complex{0, 2 * q[0]}) * gauss(q[1], 0, 1.5); }));
  const auto phi = normalize(SpinorField::scalar(g.subgrid({0}), [](auto q) {
    return gauss(q[0], 1, 1) * std::exp(Complex{0, 2 * q[0]});
  }));
  const std::vector<double> y1{0.37}, y2{-1.9};
  const auto a = conditional_wave_function(psi, {1}, y1);
  const auto b = conditional_wave_function(psi, {1}, y2);
  EXPECT_GT(fidelity(a, phi), 1 - 1e-10);
  EXPECT_GT(fidelity(a, b), 1 - 1e-10);
  EXPECT_NEAR(norm(a), 1.0, 1e-12);
}

TEST(ConditionalWaveFunction, DisjointBranchSelectsOne) {
  const Grid g = plane();
  auto phi1 = [](double x) { return Complex{gauss(x, -2, 0.7)}; };
  auto phi2 = [](double x) { return gauss(x, 2, 0.7) * std::exp(Complex{0, 1.5 * x}); };
  const auto psi = normalize(SpinorField::scalar(g, [&](auto q) {
    return 0.6 * phi1(q[0]) * gauss(q[1], -4, 0.4) + 0.8 * phi2(q[0]) * gauss(q[1], 4, 0.4);
  }));
  const auto target = normalize(SpinorField::scalar(g.subgrid({0}), [&](auto q) { return phi1(q[0]); }));
  const std::vector<double> y{-3.8};
  EXPECT_GT(fidelity(conditional_wave_function(psi, {1}, y), target), 1 - 1e-10);
}

TEST(ConditionalWaveFunction, MatchesBruteForceSlice) {
  const Grid g = plane();
  const auto psi = normalize(SpinorField::scalar(g, [](auto q) {
    return gauss(q[0], -1, 0.8) * gauss(q[1], -0.7, 1.0) + Complex{0, 0.5} * gauss(q[0], 1.5, 0.8) * gauss(q[1], 0.9, 1.0);
  }));
  const double y = 0.123;
  const auto cwf = conditional_wave_function(psi, {1}, std::vector<double>{y});
  // Oracle: full two-axis interpolation at each (x_i, Y), then normalization.
  const Grid sub = g.subgrid({0});
  SpinorField brute(sub);
  for (std::size_t i = 0; i < sub.cell_count(); ++i)
    brute(i) = interpolate(psi, std::vector<double>{sub.axis(0).coordinate(i), y})[0];
  brute = normalize(brute);
  for (std::size_t i = 0; i < sub.cell_count(); ++i) EXPECT_LT(std::abs(brute(i) - cwf(i)), 1e-10);
}

TEST(ConditionalWaveFunction, Errors) {
  const Grid g = plane();
  const auto psi = normalize(SpinorField::scalar(g, [](auto q) { return Complex{gauss(q[0], 0, 0.5) * gauss(q[1], 0, 0.3)}; }));
  EXPECT_THROW(conditional_wave_function(psi, {1}, std::vector<double>{7.9}), PreconditionError);
  EXPECT_THROW(conditional_wave_function(SpinorField(g, 2), {1}, std::vector<double>{0.0}), PreconditionError);
}

TEST(BranchOverlap, Examples) {
  const Grid g = line(20, 256);
  const auto left = packet(g, 0.5, -5), right = packet(g, 0.5, 5);
  EXPECT_LT(branch_overlap({left, right}), 1e-20);
  EXPECT_NEAR(branch_overlap({left, left}), 1.0, 1e-12);
  std::vector<bool> neg(g.cell_count()), pos(g.cell_count());
  for (std::size_t c = 0; c < g.cell_count(); ++c) (g.axis(0).coordinate(c) < 0 ? neg : pos)[c] = true;
  const auto branches = mask_branches(left + right, {neg, pos});
  EXPECT_LT(branch_overlap(branches), 1e-20);
  EXPECT_THROW(mask_branches(left, {neg, neg}), PreconditionError);
}

TEST(AsymptoticMomentum, NarrowSpectralPeak) {
  // Momentum spread 1 / (2 sigma) = 0.1; trajectories wrap on the periodic axis.
  const Grid g = line(200, 1024);
  const double k0 = 2.0, sigma = 5.0, horizon = 100.0;
  const auto psi0 = packet(g, sigma, 0.0, k0);
  const auto evo = free_run(g, psi0, horizon, 20);
  const GuidanceField field(evo);
  const auto r = asymptotic_momentum(field, sample_born(psi0, 200, 1), horizon, evo->max_spacing());
  double mean = 0.0;
  for (const auto& p : r.momenta) {
    EXPECT_NEAR(p[0], k0, 0.6);
    mean += p[0];
  }
  EXPECT_NEAR(mean / 200, k0, 0.05);
}

TEST(AsymptoticMomentum, GaussianConvergesWithHorizon) {
  const Grid g = line(256, 512);
  const auto psi0 = packet(g, 1.0);
  auto evo = free_run(g, psi0, 50.0, 5);
  const GuidanceField field(evo);
  const auto e = sample_born(psi0, 3000, 8);
  const auto early = asymptotic_momentum(field, e, 5.0, evo->max_spacing());
  const auto late = asymptotic_momentum(field, e, 50.0, evo->max_spacing());
  EXPECT_LT(late.ks_per_axis[0], 0.05);
  EXPECT_LT(late.ks_per_axis[0], early.ks_per_axis[0]);
}

TEST(EnsembleCsv, Format) {
  Ensemble e{{Configuration{{1.0, -0.5}}, Configuration{{2.0, 0.25}}}, 3, "test"};
  std::ostringstream os;
  write_ensemble_csv(os, e);
  EXPECT_EQ(os.str(), "member_id,q_1,q_2\n0,1,-0.5\n1,2,0.25\n");
}
