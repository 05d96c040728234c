// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file jumps.hpp
 * @brief Stochastic jumps between sectors of a finite configuration space.
 *
 * Each basis vector of a finite Hilbert space is one configuration, grouped
 * into labeled sectors (for example by particle number). The configuration
 * jumps from q' to q with rate
 *
 *   sigma(q' -> q) = (2 / hbar) max(0, Im(conj(psi_q) H_qq' psi_q')) / |psi_q'|^2
 *
 * and does not move between jumps. With these rates the occupation
 * probabilities follow |psi_q(t)|^2.
 */

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pilotwave/core.hpp"
#include "pilotwave/ensembles.hpp"
#include "pilotwave/parallel.hpp"
#include "pilotwave/rng.hpp"

namespace pilotwave {

inline constexpr std::size_t kMaxSectorDimension = 64;

struct Sector {
  std::string label;
  std::vector<std::string> configs;
};

class SectorSpace {
 public:
  SectorSpace() = default;
  SectorSpace(std::vector<Sector> sectors, Eigen::MatrixXcd hamiltonian, double hbar = 1.0)
      : sectors_(std::move(sectors)), h_(std::move(hamiltonian)), hbar_(hbar) {
    std::size_t dim = 0;
    for (std::size_t s = 0; s < sectors_.size(); ++s) {
      if (sectors_[s].configs.empty()) throw PreconditionError("sector '" + sectors_[s].label + "' has no configurations");
      for (std::size_t k = 0; k < sectors_[s].configs.size(); ++k) {
        sector_of_.push_back(s);
        local_of_.push_back(k);
      }
      dim += sectors_[s].configs.size();
    }
    if (dim == 0 || dim > kMaxSectorDimension) throw PreconditionError("sector space dimension must be in 1..64");
    if (h_.rows() != static_cast<Eigen::Index>(dim) || h_.cols() != static_cast<Eigen::Index>(dim))
      throw PreconditionError("hamiltonian must be a square matrix on the joint basis");
    if ((h_ - h_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw PreconditionError("hamiltonian is not Hermitian");
    if (!(hbar_ > 0.0)) throw PreconditionError("hbar must be > 0");
  }

  std::size_t dimension() const { return sector_of_.size(); }
  const std::vector<Sector>& sectors() const { return sectors_; }
  const Eigen::MatrixXcd& hamiltonian() const { return h_; }
  double hbar() const { return hbar_; }
  const std::string& sector_label(std::size_t index) const { return sectors_[sector_of_.at(index)].label; }
  const std::string& config_label(std::size_t index) const { return sectors_[sector_of_.at(index)].configs[local_of_[index]]; }

  std::size_t index_of(const std::string& sector, const std::string& config) const {
    for (std::size_t i = 0; i < dimension(); ++i)
      if (sector_label(i) == sector && config_label(i) == config) return i;
    throw PreconditionError("no configuration '" + config + "' in sector '" + sector + "'");
  }

 private:
  std::vector<Sector> sectors_;
  Eigen::MatrixXcd h_;
  double hbar_ = 1.0;
  std::vector<std::size_t> sector_of_, local_of_;
};

struct SectorState {
  std::string sector;
  std::string config;
  double time = 0.0;
};

/// Rate of the jump from configuration `from` to `to` given the state psi.
inline double jump_rate(const Eigen::VectorXcd& psi, const SectorSpace& space, std::size_t from, std::size_t to) {
  const double occ = std::norm(psi(static_cast<Eigen::Index>(from)));
  if (!(occ > 0.0)) throw PreconditionError("jump_rate: configuration " + std::to_string(from) + " is unoccupied");
  if (from == to) return 0.0;
  const auto f = static_cast<Eigen::Index>(from), t = static_cast<Eigen::Index>(to);
  const Complex j = std::conj(psi(t)) * space.hamiltonian()(t, f) * psi(f);
  return 2.0 / space.hbar() * std::max(0.0, j.imag()) / occ;
}

/// Matrix of all rates, rates(to, from); columns of unoccupied configurations are zero.
inline Eigen::MatrixXd rate_table(const Eigen::VectorXcd& psi, const SectorSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dimension());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index f = 0; f < n; ++f) {
    if (std::norm(psi(f)) == 0.0) continue;
    for (Eigen::Index t = 0; t < n; ++t)
      r(t, f) = jump_rate(psi, space, static_cast<std::size_t>(f), static_cast<std::size_t>(t));
  }
  return r;
}

/// d/dt of each occupation |psi_q|^2 as predicted by the rates.
inline Eigen::VectorXd master_equation_rhs(const Eigen::VectorXcd& psi, const SectorSpace& space) {
  const Eigen::MatrixXd r = rate_table(psi, space);
  const auto n = r.rows();
  Eigen::VectorXd p(n);
  for (Eigen::Index q = 0; q < n; ++q) p(q) = std::norm(psi(q));
  Eigen::VectorXd out(n);
  for (Eigen::Index q = 0; q < n; ++q) {
    double gain = 0.0, loss = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      gain += r(q, k) * p(k);
      loss += r(k, q) * p(q);
    }
    out(q) = gain - loss;
  }
  return out;
}

/// Exact Schroedinger evolution on the finite space by eigendecomposition.
class SectorEvolution {
 public:
  SectorEvolution(const SectorSpace& space, Eigen::VectorXcd psi0) : hbar_(space.hbar()) {
    if (psi0.size() != static_cast<Eigen::Index>(space.dimension()))
      throw PreconditionError("initial state has the wrong dimension");
    const double n = psi0.norm();
    if (!(n > 0.0)) throw PreconditionError("initial state has zero norm");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(space.hamiltonian());
    vectors_ = es.eigenvectors();
    energies_ = es.eigenvalues();
    coeff_ = vectors_.adjoint() * (psi0 / n);
  }

  Eigen::VectorXcd state(double t) const {
    Eigen::VectorXcd c = coeff_;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(Complex{0.0, -energies_(k) * t / hbar_});
    return vectors_ * c;
  }

  Eigen::VectorXd occupations(double t) const { return state(t).cwiseAbs2(); }

 private:
  double hbar_;
  Eigen::MatrixXcd vectors_;
  Eigen::VectorXd energies_;
  Eigen::VectorXcd coeff_;
};

struct MarkovPath {
  std::vector<double> jump_times;
  std::vector<std::size_t> states;  ///< states[0] is the start; states[k + 1] follows jump k
  std::uint64_t seed = 0;
  std::size_t path_id = 0;

  std::size_t state_at(double t) const {
    const auto k = std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin();
    return states[static_cast<std::size_t>(k)];
  }
};

inline constexpr std::uint32_t kJumpStream = stream_label("jumps");

/// Total exit rate of every configuration at the ends and midpoints of a
/// uniform mesh on [0, t_final]; shared read-only by all paths.
class ExitRateMesh {
 public:
  ExitRateMesh(const SectorEvolution& evolution, const SectorSpace& space, double t_final, double dt_rate)
      : t_final_(t_final) {
    if (!(t_final > 0.0) || !(dt_rate > 0.0)) throw PreconditionError("simulate: t_final and dt_rate must be > 0");
    intervals_ = static_cast<std::size_t>(std::ceil(t_final / dt_rate - 1e-9));
    const auto n = static_cast<Eigen::Index>(space.dimension());
    exit_ = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(2 * intervals_ + 1));
    for (Eigen::Index j = 0; j < exit_.cols(); ++j) {
      const double t = t_final * static_cast<double>(j) / static_cast<double>(2 * intervals_);
      exit_.col(j) = rate_table(evolution.state(t), space).colwise().sum().transpose();
    }
  }

  std::size_t intervals() const { return intervals_; }
  double t_final() const { return t_final_; }
  double time(std::size_t k) const { return t_final_ * static_cast<double>(k) / static_cast<double>(intervals_); }

  /// Candidate rate for configuration q on interval k.
  double bound(std::size_t k, std::size_t q) const {
    const auto r = static_cast<Eigen::Index>(q);
    const auto c = static_cast<Eigen::Index>(2 * k);
    return 2.0 * std::max({exit_(r, c), exit_(r, c + 1), exit_(r, c + 2)});
  }

 private:
  double t_final_;
  std::size_t intervals_ = 0;
  Eigen::MatrixXd exit_;
};

/**
 * One path of the jump process on [0, t_final], by thinning. On each mesh
 * interval the candidate rate is twice the largest exit rate seen at the
 * interval's ends and midpoint. Should a candidate find a larger rate, it is
 * accepted with probability one and the bound is raised for the rest of the
 * interval.
 */
inline MarkovPath simulate(const SectorEvolution& evolution, const SectorSpace& space, std::size_t start,
                           const ExitRateMesh& mesh, std::uint64_t seed, std::size_t path_id = 0) {
  if (start >= space.dimension()) throw PreconditionError("simulate: start configuration out of range");
  if (!(evolution.occupations(0.0)(static_cast<Eigen::Index>(start)) > 0.0))
    throw PreconditionError("simulate: start configuration is unoccupied at t = 0");
  CounterRng rng(seed, kJumpStream, path_id);
  MarkovPath path{{}, {start}, seed, path_id};
  std::size_t q = start;
  const std::size_t n = space.dimension();
  std::vector<double> rates(n);

  auto exit_rates = [&](double t, std::size_t from) {
    const Eigen::VectorXcd psi = evolution.state(t);
    double total = 0.0;
    if (std::norm(psi(static_cast<Eigen::Index>(from))) == 0.0) {
      std::fill(rates.begin(), rates.end(), 0.0);
      return 0.0;
    }
    for (std::size_t to = 0; to < n; ++to) {
      rates[to] = jump_rate(psi, space, from, to);
      total += rates[to];
    }
    return total;
  };

  for (std::size_t k = 0; k < mesh.intervals(); ++k) {
    const double t1 = mesh.time(k + 1);
    double t = mesh.time(k);
    double bound = mesh.bound(k, q);
    while (bound > 0.0) {
      t += rng.exponential(bound);
      if (t >= t1) break;
      const double lambda = exit_rates(t, q);
      const double u = rng.uniform();
      if (lambda > bound) {
        bound = 2.0 * lambda;
      } else if (u * bound >= lambda) {
        continue;
      }
      // Accepted: pick the target in proportion to its rate.
      const double pick = rng.uniform() * lambda;
      double acc = 0.0;
      std::size_t target = q;
      for (std::size_t to = 0; to < n; ++to) {
        if (rates[to] <= 0.0) continue;
        acc += rates[to];
        target = to;
        if (pick < acc) break;
      }
      if (target == q) continue;
      q = target;
      path.jump_times.push_back(t);
      path.states.push_back(q);
      bound = std::max(bound, mesh.bound(k, q));
    }
  }
  return path;
}

inline MarkovPath simulate(const SectorEvolution& evolution, const SectorSpace& space, std::size_t start,
                           double t_final, std::uint64_t seed, double dt_rate, std::size_t path_id = 0) {
  return simulate(evolution, space, start, ExitRateMesh(evolution, space, t_final, dt_rate), seed, path_id);
}

inline std::vector<MarkovPath> simulate_paths(const SectorEvolution& evolution, const SectorSpace& space,
                                              std::size_t start, double t_final, std::uint64_t seed, double dt_rate,
                                              std::size_t count, unsigned workers = 1) {
  const ExitRateMesh mesh(evolution, space, t_final, dt_rate);
  std::vector<MarkovPath> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = simulate(evolution, space, start, mesh, seed, i); });
  return out;
}

/// Empirical configuration occupation at each time against |psi_q(t)|^2.
inline std::vector<DistanceReport> occupation_check(const std::vector<MarkovPath>& paths,
                                                    const SectorEvolution& evolution, std::span<const double> times) {
  if (paths.size() < 100) throw PreconditionError("occupation_check needs at least 100 paths");
  std::vector<DistanceReport> out;
  for (double t : times) {
    const Eigen::VectorXd p = evolution.occupations(t);
    std::vector<double> counts(static_cast<std::size_t>(p.size()), 0.0);
    for (const auto& path : paths) counts[path.state_at(t)] += 1.0;
    DistanceReport r;
    r.time = t;
    r.sample_count = paths.size();
    double tv = 0.0;
    std::vector<double> pv(p.data(), p.data() + p.size());
    for (std::size_t q = 0; q < pv.size(); ++q) tv += std::abs(counts[q] / static_cast<double>(paths.size()) - pv[q]);
    r.total_variation = 0.5 * tv;
    r.tv_bound = 3.0 * expected_multinomial_tv(pv, paths.size());
    r.pass = r.total_variation <= r.tv_bound;
    out.push_back(std::move(r));
  }
  return out;
}

/// Two configurations in two sectors coupled by a real off-diagonal g.
inline SectorSpace two_level_space(double g = 1.0, double hbar = 1.0) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(0, 1) = h(1, 0) = g;
  return SectorSpace({{"1", {"a"}}, {"2", {"b"}}}, std::move(h), hbar);
}

/// Vacuum plus one particle on a few sites; the vacuum couples to every site
/// and neighbouring sites hop with amplitude `hop`.
inline SectorSpace creation_model(std::span<const Complex> couplings, std::span<const double> site_energies,
                                  double hop = 0.0, double hbar = 1.0) {
  if (couplings.size() != site_energies.size() || couplings.empty())
    throw PreconditionError("creation_model: one coupling and one energy per site");
  const auto n = static_cast<Eigen::Index>(couplings.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  Sector sites{"1", {}};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    h(k + 1, k + 1) = site_energies[i];
    h(k + 1, 0) = couplings[i];
    h(0, k + 1) = std::conj(couplings[i]);
    if (k + 1 < n) h(k + 1, k + 2) = h(k + 2, k + 1) = hop;
    sites.configs.push_back("site" + std::to_string(k));
  }
  return SectorSpace({{"0", {"empty"}}, std::move(sites)}, std::move(h), hbar);
}

/// CSV with header path_id,t,sector,config: the start state and each jump.
inline void write_paths_csv(std::ostream& os, const std::vector<MarkovPath>& paths, const SectorSpace& space) {
  os << "path_id,t,sector,config\n";
  for (const auto& p : paths) {
    for (std::size_t k = 0; k < p.states.size(); ++k) {
      os << p.path_id << ',';
      write_number(os, k == 0 ? 0.0 : p.jump_times[k - 1]);
      os << ',' << space.sector_label(p.states[k]) << ',' << space.config_label(p.states[k]) << '\n';
    }
  }
}

}  // namespace pilotwave
