// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file guidance.hpp
 * @brief The Bohmian velocity field and trajectory integration.
 *
 * For particle k the velocity is (hbar / m_k) Im(psi* grad_k psi) / (psi* psi),
 * with psi* phi the spin-space scalar product. Off-grid values of psi and of
 * its spectral gradients come from Catmull-Rom interpolation; between
 * snapshots the amplitudes are interpolated linearly in time.
 *
 * Where the density drops below the node floor the velocity is undefined.
 * The integrator then reuses the last good velocity of that trajectory and
 * flags the step. Speeds are clipped at NodeGuard::max_speed.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pilotwave/dynamics.hpp"
#include "pilotwave/interpolation.hpp"
#include "pilotwave/lattice.hpp"
#include "pilotwave/parallel.hpp"

namespace pilotwave {

/// Particle positions, flattened in grid-axis order.
struct Configuration {
  std::vector<double> coords;

  std::size_t size() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }
  double& operator[](std::size_t i) { return coords[i]; }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct NodeGuard {
  double rho_floor_rel = 1e-12;  ///< floor as a fraction of the snapshot's peak density
  double max_speed = 0.0;        ///< 0 selects 10 * largest extent / snapshot spacing
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Configuration> configurations;
  std::vector<bool> node_flags;

  const Configuration& final_configuration() const { return configurations.back(); }
  std::size_t node_events() const { return static_cast<std::size_t>(std::count(node_flags.begin(), node_flags.end(), true)); }
};

/// Raised when a trajectory leaves a non-periodic axis.
class TrajectoryExit : public Error {
 public:
  TrajectoryExit(double t, const std::string& what) : Error(what), exit_time(t) {}
  double exit_time;
};

/// True when q lies in the extent of every non-periodic axis.
inline bool inside_extent(const Grid& grid, std::span<const double> q) {
  for (std::size_t a = 0; a < grid.rank(); ++a) {
    const Axis& ax = grid.axis(a);
    if (!ax.periodic && (q[a] < ax.origin || q[a] > ax.coordinate(ax.points - 1))) return false;
  }
  return true;
}

/// Map periodic coordinates into [origin - h/2, origin + extent - h/2).
inline Configuration wrap(const Grid& grid, Configuration q) {
  for (std::size_t a = 0; a < grid.rank(); ++a) {
    const Axis& ax = grid.axis(a);
    if (!ax.periodic) continue;
    const double lo = ax.origin - 0.5 * ax.spacing();
    q[a] = lo + std::fmod(std::fmod(q[a] - lo, ax.extent) + ax.extent, ax.extent);
  }
  return q;
}

/**
 * Velocity field of a WaveEvolution. Construction computes the spectral
 * gradient of every snapshot along every axis, so the memory footprint is
 * (rank + 1) times that of the evolution.
 */
class GuidanceField {
 public:
  static constexpr std::size_t kMaxSpin = 8;

  explicit GuidanceField(std::shared_ptr<const WaveEvolution> evolution, unsigned workers = 1)
      : evo_(std::move(evolution)) {
    if (!evo_ || evo_->empty()) throw PreconditionError("guidance needs a non-empty evolution");
    if (evo_->spin_dim() > kMaxSpin) throw PreconditionError("guidance supports spin_dim up to 8");
    const std::size_t n = evo_->size();
    const std::size_t rank = evo_->grid().rank();
    gradients_.resize(n);
    max_density_.resize(n);
    parallel_for(n, workers, [&](std::size_t i) {
      const SpinorField& psi = evo_->snapshot(i);
      gradients_[i].reserve(rank);
      for (std::size_t a = 0; a < rank; ++a) gradients_[i].push_back(gradient(psi, a));
      max_density_[i] = density(psi).max();
    });
    double extent = 0.0;
    for (const auto& ax : evo_->grid().axes()) extent = std::max(extent, ax.extent);
    const double spacing = n > 1 ? evo_->max_spacing() : 1.0;
    default_max_speed_ = 10.0 * extent / spacing;
  }

  const WaveEvolution& evolution() const { return *evo_; }
  const Grid& grid() const { return evo_->grid(); }
  double default_max_speed() const { return default_max_speed_; }

  /**
   * Velocity at time t and point q, written to v. Returns false and leaves v
   * untouched when the density is below the node floor.
   */
  bool velocity(double t, std::span<const double> q, const NodeGuard& guard, std::span<double> v) const {
    const auto& times = evo_->times();
    const double tol = 1e-9 * std::max(1.0, std::abs(times.back()));
    if (t < times.front() - tol || t > times.back() + tol)
      throw PreconditionError("velocity requested outside the evolution's time range");
    std::size_t i = 0;
    double s = 0.0;
    if (times.size() > 1) {
      auto it = std::upper_bound(times.begin(), times.end(), t);
      i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - times.begin() - 1, 0,
                                                              static_cast<std::ptrdiff_t>(times.size()) - 2));
      s = std::clamp((t - times[i]) / (times[i + 1] - times[i]), 0.0, 1.0);
    }
    const Grid& g = grid();
    const std::size_t rank = g.rank();
    const std::size_t d = evo_->spin_dim();
    const PointStencil stencil(g, q);

    // psi followed by each gradient, mixed linearly in time.
    std::array<Complex, kMaxSpin> tmp{};
    std::array<Complex, kMaxSpin*(kMaxAxes + 1)> mixed{};
    auto accumulate = [&](std::size_t snap, double w) {
      if (w == 0.0) return;
      stencil.apply(g, evo_->snapshot(snap).amplitudes(), d, tmp);
      for (std::size_t c = 0; c < d; ++c) mixed[c] += w * tmp[c];
      for (std::size_t a = 0; a < rank; ++a) {
        stencil.apply(g, gradients_[snap][a].amplitudes(), d, tmp);
        for (std::size_t c = 0; c < d; ++c) mixed[(a + 1) * d + c] += w * tmp[c];
      }
    };
    accumulate(i, 1.0 - s);
    if (times.size() > 1) accumulate(i + 1, s);

    const double rho = detail::spin_norm2(mixed.data(), d);
    const double peak = times.size() > 1 ? std::max(max_density_[i], max_density_[i + 1]) : max_density_[i];
    if (!(rho > guard.rho_floor_rel * peak) || rho == 0.0) return false;
    const auto& kin = evo_->kinematics();
    const double vmax = guard.max_speed > 0.0 ? guard.max_speed : default_max_speed_;
    for (std::size_t a = 0; a < rank; ++a) {
      const Complex j = detail::spin_dot(mixed.data(), &mixed[(a + 1) * d], d);
      const double va = kin.hbar / kin.axis_mass[a] * j.imag() / rho;
      v[a] = std::clamp(va, -vmax, vmax);
    }
    return true;
  }

 private:
  std::shared_ptr<const WaveEvolution> evo_;
  std::vector<std::vector<SpinorField>> gradients_;
  std::vector<double> max_density_;
  double default_max_speed_ = 0.0;
};

struct VelocitySample {
  std::vector<double> v;
  bool node = false;
};

/// Velocity of a single wave function at Q. On a node the velocity is zero and flagged.
inline VelocitySample velocity(const SpinorField& psi, const Kinematics& kinematics, const Configuration& q,
                               const NodeGuard& guard = {}) {
  auto evo = std::make_shared<WaveEvolution>(kinematics, true);
  evo->append(0.0, psi);
  GuidanceField field(std::move(evo));
  VelocitySample out{std::vector<double>(q.size(), 0.0), false};
  out.node = !field.velocity(0.0, q.coords, guard, out.v);
  return out;
}

/**
 * Classical RK4 through the time-interpolated velocity field, from t_start
 * for a duration t_final. The step is t_final / ceil(t_final / rk_dt).
 * If store_path is false only the initial and final configurations are kept.
 */
inline Trajectory integrate_trajectory(const GuidanceField& field, const Configuration& q0, double t_final,
                                       double rk_dt, const NodeGuard& guard = {}, double t_start = NAN,
                                       bool store_path = true) {
  const WaveEvolution& evo = field.evolution();
  const Grid& g = field.grid();
  if (std::isnan(t_start)) t_start = evo.t_begin();
  if (q0.size() != g.rank()) throw PreconditionError("configuration dimension does not match the grid");
  if (!inside_extent(g, q0.coords)) throw PreconditionError("initial configuration lies outside the grid");
  if (!(rk_dt > 0.0)) throw PreconditionError("rk_dt must be > 0");
  if (evo.size() > 1 && rk_dt > evo.max_spacing() * (1.0 + 1e-9))
    throw PreconditionError("rk_dt must not exceed the snapshot spacing");
  if (t_final < 0.0 || t_start + t_final > evo.t_end() + 1e-9 * std::max(1.0, evo.t_end()))
    throw PreconditionError("trajectory time range exceeds the evolution");

  Trajectory traj;
  traj.times.push_back(t_start);
  traj.configurations.push_back(q0);
  traj.node_flags.push_back(false);
  if (t_final == 0.0) return traj;

  const auto steps = static_cast<std::size_t>(std::ceil(t_final / rk_dt - 1e-9));
  const double h = t_final / static_cast<double>(steps);
  const std::size_t m = g.rank();
  std::vector<double> last_v(m, 0.0), k1(m), k2(m), k3(m), k4(m), tmp(m);
  Configuration q = q0;
  bool flagged = false;

  auto eval = [&](double t, const std::vector<double>& x, std::vector<double>& k) {
    if (field.velocity(t, x, guard, k)) {
      last_v = k;
    } else {
      k = last_v;
      flagged = true;
    }
  };
  auto check = [&](double t, const std::vector<double>& x) {
    if (!inside_extent(g, x)) {
      std::ostringstream os;
      os << "trajectory left the grid extent at t = " << t;
      throw TrajectoryExit(t, os.str());
    }
  };

  for (std::size_t n = 0; n < steps; ++n) {
    const double t = t_start + h * static_cast<double>(n);
    flagged = false;
    eval(t, q.coords, k1);
    for (std::size_t a = 0; a < m; ++a) tmp[a] = q[a] + 0.5 * h * k1[a];
    check(t + 0.5 * h, tmp);
    eval(t + 0.5 * h, tmp, k2);
    for (std::size_t a = 0; a < m; ++a) tmp[a] = q[a] + 0.5 * h * k2[a];
    check(t + 0.5 * h, tmp);
    eval(t + 0.5 * h, tmp, k3);
    for (std::size_t a = 0; a < m; ++a) tmp[a] = q[a] + h * k3[a];
    check(t + h, tmp);
    const double t_next = t_start + h * static_cast<double>(n + 1);
    eval(t_next, tmp, k4);
    for (std::size_t a = 0; a < m; ++a) q[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    check(t_next, q.coords);
    if (store_path || n + 1 == steps) {
      traj.times.push_back(t_next);
      traj.configurations.push_back(q);
      traj.node_flags.push_back(flagged);
    } else if (flagged) {
      traj.node_flags.back() = true;
    }
  }
  return traj;
}

/**
 * Reorder particles: particle k of the result is particle perm[k] of q.
 * Only particles of equal mass and dimension may trade places.
 */
inline Configuration permute(const Configuration& q, const std::vector<std::size_t>& perm,
                             const ParticleLayout& layout) {
  const std::size_t n = layout.particle_count();
  if (perm.size() != n) throw PreconditionError("permutation length must equal the particle count");
  std::vector<bool> seen(n, false);
  for (auto p : perm) {
    if (p >= n || seen[p]) throw PreconditionError("not a permutation");
    seen[p] = true;
  }
  Configuration out = q;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = perm[k];
    if (layout.masses[k] != layout.masses[src] || layout.axes[k].size() != layout.axes[src].size())
      throw PreconditionError("permutation mixes particles of different kinds");
    for (std::size_t i = 0; i < layout.axes[k].size(); ++i) out[layout.axes[k][i]] = q[layout.axes[src][i]];
  }
  return out;
}

inline void write_number(std::ostream& os, double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  os.write(buf, len);
}

/// CSV with header t,q_1,...,q_M,node_flag.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t m = traj.configurations.empty() ? 0 : traj.configurations[0].size();
  os << "t";
  for (std::size_t a = 0; a < m; ++a) os << ",q_" << a + 1;
  os << ",node_flag\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    write_number(os, traj.times[i]);
    for (double x : traj.configurations[i].coords) {
      os << ',';
      write_number(os, x);
    }
    os << ',' << (traj.node_flags[i] ? 1 : 0) << '\n';
  }
}

/// Long format keyed by trajectory id: trajectory_id,t,q_1,...,q_M,node_flag.
inline void write_trajectories_csv(std::ostream& os, std::span<const Trajectory> trajs) {
  const std::size_t m = trajs.empty() || trajs[0].configurations.empty() ? 0 : trajs[0].configurations[0].size();
  os << "trajectory_id,t";
  for (std::size_t a = 0; a < m; ++a) os << ",q_" << a + 1;
  os << ",node_flag\n";
  for (std::size_t k = 0; k < trajs.size(); ++k)
    for (std::size_t i = 0; i < trajs[k].times.size(); ++i) {
      os << k << ',';
      write_number(os, trajs[k].times[i]);
      for (double x : trajs[k].configurations[i].coords) {
        os << ',';
        write_number(os, x);
      }
      os << ',' << (trajs[k].node_flags[i] ? 1 : 0) << '\n';
    }
}

}  // namespace pilotwave
