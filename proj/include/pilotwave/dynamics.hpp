// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file dynamics.hpp
 * @brief Hamiltonians on a grid and Strang split-operator time evolution.
 *
 * One step applies exp(-i W dt / 2 hbar), then the exact kinetic phase in
 * spectral space, then the same half potential. W is the scalar potential V
 * times the identity plus the optional per-cell Hermitian spin coupling.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pilotwave/core.hpp"
#include "pilotwave/field_io.hpp"
#include "pilotwave/lattice.hpp"

namespace pilotwave {

/// Which grid axes belong to which particle, and the particle masses.
struct ParticleLayout {
  std::vector<double> masses;
  std::vector<std::vector<std::size_t>> axes;

  /// One particle moving in all axes of a rank-r grid.
  static ParticleLayout single(std::size_t rank, double mass = 1.0) {
    ParticleLayout p;
    p.masses = {mass};
    p.axes.emplace_back();
    for (std::size_t a = 0; a < rank; ++a) p.axes[0].push_back(a);
    return p;
  }

  /// One 1D particle per axis, all with the same mass.
  static ParticleLayout one_per_axis(std::size_t rank, double mass = 1.0) {
    ParticleLayout p;
    for (std::size_t a = 0; a < rank; ++a) {
      p.masses.push_back(mass);
      p.axes.push_back({a});
    }
    return p;
  }

  std::size_t particle_count() const { return masses.size(); }

  std::vector<double> axis_masses(std::size_t rank) const {
    if (masses.size() != axes.size()) throw PreconditionError("particle layout: one mass per axis group required");
    std::vector<double> m(rank, -1.0);
    for (std::size_t k = 0; k < masses.size(); ++k) {
      if (!(masses[k] > 0.0)) throw PreconditionError("particle masses must be > 0");
      for (auto a : axes[k]) {
        if (a >= rank || m[a] > 0.0) throw PreconditionError("particle layout must cover each axis exactly once");
        m[a] = masses[k];
      }
    }
    if (std::any_of(m.begin(), m.end(), [](double v) { return v < 0.0; }))
      throw PreconditionError("particle layout leaves an axis without a particle");
    return m;
  }
};

/// What the guidance law needs from a Hamiltonian.
struct Kinematics {
  double hbar = 1.0;
  std::vector<double> axis_mass;
  ParticleLayout layout;
};

struct HamiltonianSpec {
  Grid grid;
  std::size_t spin_dim = 1;
  ParticleLayout particles;
  std::vector<double> potential;       ///< V per cell; empty means V = 0
  std::vector<Complex> spin_coupling;  ///< d*d row-major per cell; empty means none
  double hbar = 1.0;

  bool has_potential() const {
    return std::any_of(potential.begin(), potential.end(), [](double v) { return v != 0.0; });
  }
  bool has_spin_coupling() const { return !spin_coupling.empty(); }
  bool is_free() const { return !has_potential() && !has_spin_coupling(); }

  Kinematics kinematics() const { return {hbar, particles.axis_masses(grid.rank()), particles}; }

  void validate() const {
    if (!(hbar > 0.0)) throw PreconditionError("hbar must be > 0");
    (void)particles.axis_masses(grid.rank());
    if (!potential.empty()) {
      if (potential.size() != grid.cell_count()) throw PreconditionError("potential must have one value per cell");
      for (double v : potential)
        if (!std::isfinite(v)) throw PreconditionError("potential must be finite everywhere");
    }
    if (!spin_coupling.empty()) {
      const std::size_t d = spin_dim;
      if (spin_coupling.size() != grid.cell_count() * d * d)
        throw PreconditionError("spin coupling must hold a d x d matrix per cell");
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const Complex* m = &spin_coupling[c * d * d];
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j)
            if (std::abs(m[i * d + j] - std::conj(m[j * d + i])) > 1e-12)
              throw PreconditionError("spin coupling matrix is not Hermitian at cell " + std::to_string(c));
      }
    }
  }
};

inline HamiltonianSpec make_hamiltonian(const Grid& grid, std::size_t spin_dim, ParticleLayout particles,
                                        double hbar = 1.0) {
  HamiltonianSpec h{grid, spin_dim, std::move(particles), {}, {}, hbar};
  h.validate();
  return h;
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

/// V = sum over axes of m_a omega^2 x_a^2 / 2.
inline std::vector<double> harmonic_potential(const Grid& grid, double omega, const ParticleLayout& particles) {
  const auto m = particles.axis_masses(grid.rank());
  std::vector<double> v(grid.cell_count());
  std::vector<double> q(grid.rank());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    grid.cell_coordinates(c, q);
    double acc = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) acc += 0.5 * m[a] * omega * omega * q[a] * q[a];
    v[c] = acc;
  }
  return v;
}

/// Soft-core Coulomb energy 1/2 sum_{j != k} e_j e_k / sqrt(|q_j - q_k|^2 + a^2).
inline double coulomb_energy(const std::vector<std::vector<double>>& positions, const std::vector<double>& charges,
                             double softening) {
  if (positions.size() < 2 || positions.size() != charges.size())
    throw PreconditionError("coulomb: need >= 2 particles with one charge each");
  if (!(softening > 0.0)) throw PreconditionError("coulomb: softening length must be > 0");
  double v = 0.0;
  for (std::size_t j = 0; j < positions.size(); ++j)
    for (std::size_t k = 0; k < positions.size(); ++k) {
      if (j == k) continue;
      double r2 = softening * softening;
      for (std::size_t i = 0; i < positions[j].size(); ++i) {
        const double dx = positions[j][i] - positions[k][i];
        r2 += dx * dx;
      }
      v += 0.5 * charges[j] * charges[k] / std::sqrt(r2);
    }
  return v;
}

/// Coulomb potential on the grid for the particles of `layout`.
inline std::vector<double> build_coulomb(const Grid& grid, const std::vector<double>& charges,
                                         const ParticleLayout& layout, double softening) {
  if (layout.particle_count() < 2 || charges.size() != layout.particle_count())
    throw PreconditionError("coulomb: need >= 2 particles with one charge each");
  for (const auto& ax : layout.axes)
    if (ax.size() != layout.axes[0].size()) throw PreconditionError("coulomb: particles must share a dimension");
  std::vector<double> v(grid.cell_count());
  std::vector<double> q(grid.rank());
  std::vector<std::vector<double>> pos(layout.particle_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    grid.cell_coordinates(c, q);
    for (std::size_t k = 0; k < pos.size(); ++k) {
      pos[k].clear();
      for (auto a : layout.axes[k]) pos[k].push_back(q[a]);
    }
    v[c] = coulomb_energy(pos, charges, softening);
  }
  return v;
}

/// Rectangular barrier of the given height and width centered on `center` along `axis`.
inline std::vector<double> barrier_potential(const Grid& grid, double height, double width, double center,
                                             std::size_t axis = 0) {
  std::vector<double> v(grid.cell_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const double x = grid.axis(axis).coordinate(grid.axis_index(c, axis));
    v[c] = std::abs(x - center) < 0.5 * width ? height : 0.0;
  }
  return v;
}

inline std::vector<double> linear_potential(const Grid& grid, double slope, std::size_t axis = 0) {
  std::vector<double> v(grid.cell_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c)
    v[c] = slope * grid.axis(axis).coordinate(grid.axis_index(c, axis));
  return v;
}

/// Stern-Gerlach coupling W(z) = -slope * z * sigma_z on a spin-1/2 field.
inline std::vector<Complex> stern_gerlach_coupling(const Grid& grid, double slope, std::size_t axis = 0) {
  std::vector<Complex> w(grid.cell_count() * 4);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const double z = grid.axis(axis).coordinate(grid.axis_index(c, axis));
    w[c * 4 + 0] = -slope * z;
    w[c * 4 + 3] = slope * z;
  }
  return w;
}

/// The same d x d matrix in every cell.
inline std::vector<Complex> uniform_spin_coupling(const Grid& grid, const std::vector<Complex>& matrix) {
  std::vector<Complex> w;
  w.reserve(grid.cell_count() * matrix.size());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) w.insert(w.end(), matrix.begin(), matrix.end());
  return w;
}

/**
 * Install a potential described by one of the built-in forms:
 *
 *   free
 *   harmonic(omega)
 *   coulomb(e1:e2:..., softening)
 *   barrier(height, width, center)
 *   linear_gradient(slope)       -slope*z*sigma_z for spin 1/2, slope*x otherwise
 *   file(path)                   real part of a field snapshot with spin_dim 1
 */
inline void apply_potential_spec(HamiltonianSpec& h, const std::string& spec) {
  const auto open = spec.find('(');
  const std::string name = spec.substr(0, open);
  std::vector<std::string> args;
  if (open != std::string::npos) {
    const auto close = spec.rfind(')');
    if (close == std::string::npos || close < open) throw ConfigError("potential: missing ')' in '" + spec + "'");
    std::string inner = spec.substr(open + 1, close - open - 1);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      args.push_back(item);
    }
  }
  auto num = [&](std::size_t i) {
    try {
      return std::stod(args.at(i));
    } catch (const std::exception&) {
      throw ConfigError("potential '" + spec + "': argument " + std::to_string(i + 1) + " is not a number");
    }
  };
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw ConfigError("potential '" + name + "' takes " + std::to_string(n) + " argument(s)");
  };
  if (name == "free") {
    h.potential.clear();
    h.spin_coupling.clear();
  } else if (name == "harmonic") {
    need(1);
    h.potential = harmonic_potential(h.grid, num(0), h.particles);
  } else if (name == "coulomb") {
    need(2);
    std::vector<double> charges;
    std::stringstream ss(args[0]);
    std::string q;
    while (std::getline(ss, q, ':')) charges.push_back(std::stod(q));
    h.potential = build_coulomb(h.grid, charges, h.particles, num(1));
  } else if (name == "barrier") {
    need(3);
    h.potential = barrier_potential(h.grid, num(0), num(1), num(2));
  } else if (name == "linear_gradient") {
    need(1);
    if (h.spin_dim == 2)
      h.spin_coupling = stern_gerlach_coupling(h.grid, num(0));
    else
      h.potential = linear_potential(h.grid, num(0));
  } else if (name == "file") {
    need(1);
    const SpinorField table = load_field(args[0]);
    if (table.spin_dim() != 1 || !(table.grid() == h.grid))
      throw ConfigError("potential file must hold a spin_dim 1 field on the run grid");
    h.potential.resize(h.grid.cell_count());
    for (std::size_t c = 0; c < h.grid.cell_count(); ++c) h.potential[c] = table(c).real();
  } else {
    throw ConfigError("unknown potential '" + name + "'");
  }
  h.validate();
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

struct PropagatorConfig {
  double dt = 0.0;
  std::size_t snapshot_stride = 10;  ///< propagator steps between stored snapshots
};

/// Largest kinetic phase rate sum_a hbar k_a^2 / 2 m_a over the spectral grid.
inline double max_kinetic_rate(const HamiltonianSpec& h) {
  const auto m = h.particles.axis_masses(h.grid.rank());
  double rate = 0.0;
  for (std::size_t a = 0; a < h.grid.rank(); ++a) {
    const double kmax = kPi / h.grid.axis(a).spacing();
    rate += h.hbar * kmax * kmax / (2.0 * m[a]);
  }
  return rate;
}

/// Time steps must satisfy |dt| * max_kinetic_rate < pi.
inline double stability_bound(const HamiltonianSpec& h) { return kPi / max_kinetic_rate(h); }

inline void check_time_step(const HamiltonianSpec& h, double dt) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw PreconditionError("time step must be finite and nonzero");
  const double bound = stability_bound(h);
  if (std::abs(dt) >= bound) {
    std::ostringstream os;
    os << "time step " << dt << " violates the kinetic phase bound " << bound;
    throw PreconditionError(os.str());
  }
}

inline PropagatorConfig default_config(const HamiltonianSpec& h) { return {0.2 * stability_bound(h), 10}; }

namespace detail {

/// exp(-i tau A) for a Hermitian d x d matrix A (row-major), written to out.
inline void hermitian_exp(const Complex* a, std::size_t d, double tau, Complex* out) {
  if (d == 1) {
    out[0] = std::exp(Complex{0.0, -tau * a[0].real()});
    return;
  }
  if (d == 2) {
    // A = a0 I + ax sx + ay sy + az sz
    const double a0 = 0.5 * (a[0].real() + a[3].real());
    const double az = 0.5 * (a[0].real() - a[3].real());
    const double ax = a[1].real();
    const double ay = -a[1].imag();
    const double r = std::sqrt(ax * ax + ay * ay + az * az);
    const Complex phase = std::exp(Complex{0.0, -tau * a0});
    const double c = std::cos(tau * r);
    const double s = r > 0.0 ? std::sin(tau * r) / r : tau;
    const Complex mi{0.0, -1.0};
    out[0] = phase * (c + mi * s * az);
    out[1] = phase * (mi * s * Complex{ax, -ay});
    out[2] = phase * (mi * s * Complex{ax, ay});
    out[3] = phase * (c - mi * s * az);
    return;
  }
  // Scaled-and-squared Taylor series.
  std::vector<Complex> m(d * d), term(d * d), next(d * d), acc(d * d);
  double norm1 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < d; ++i) col += std::abs(a[i * d + j]) * std::abs(tau);
    norm1 = std::max(norm1, col);
  }
  int squarings = norm1 > 0.5 ? static_cast<int>(std::ceil(std::log2(norm1 / 0.5))) : 0;
  const double scale = std::ldexp(1.0, -squarings);
  for (std::size_t i = 0; i < d * d; ++i) m[i] = Complex{0.0, -tau * scale} * a[i];
  std::fill(acc.begin(), acc.end(), Complex{});
  std::fill(term.begin(), term.end(), Complex{});
  for (std::size_t i = 0; i < d; ++i) acc[i * d + i] = term[i * d + i] = 1.0;
  auto matmul = [d](const std::vector<Complex>& x, const std::vector<Complex>& y, std::vector<Complex>& z) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        Complex s{};
        for (std::size_t k = 0; k < d; ++k) s += x[i * d + k] * y[k * d + j];
        z[i * d + j] = s;
      }
  };
  for (int n = 1; n <= 18; ++n) {
    matmul(term, m, next);
    for (std::size_t i = 0; i < d * d; ++i) {
      term[i] = next[i] / static_cast<double>(n);
      acc[i] += term[i];
    }
  }
  for (int s = 0; s < squarings; ++s) {
    matmul(acc, acc, next);
    acc.swap(next);
  }
  std::copy(acc.begin(), acc.end(), out);
}

}  // namespace detail

class SplitOperatorPropagator {
 public:
  /// dt may be negative, which propagates backward in time.
  SplitOperatorPropagator(const HamiltonianSpec& h, double dt)
      : grid_(h.grid), spin_dim_(h.spin_dim), dt_(dt) {
    h.validate();
    check_time_step(h, dt);
    const std::size_t cells = grid_.cell_count();
    const std::size_t d = spin_dim_;
    const double tau = 0.5 * dt / h.hbar;

    matrix_potential_ = h.has_spin_coupling();
    if (matrix_potential_) {
      half_potential_.resize(cells * d * d);
      std::vector<Complex> w(d * d);
      for (std::size_t c = 0; c < cells; ++c) {
        std::copy_n(&h.spin_coupling[c * d * d], d * d, w.begin());
        const double v = h.potential.empty() ? 0.0 : h.potential[c];
        for (std::size_t s = 0; s < d; ++s) w[s * d + s] += v;
        detail::hermitian_exp(w.data(), d, tau, &half_potential_[c * d * d]);
      }
    } else if (h.has_potential()) {
      half_potential_.resize(cells);
      for (std::size_t c = 0; c < cells; ++c) half_potential_[c] = std::exp(Complex{0.0, -tau * h.potential[c]});
    }

    const auto m = h.particles.axis_masses(grid_.rank());
    kinetic_.resize(cells);
    const double inv_n = 1.0 / static_cast<double>(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      double e = 0.0;
      for (std::size_t a = 0; a < grid_.rank(); ++a) {
        const double k = grid_.wavenumber(a, grid_.axis_index(c, a));
        e += h.hbar * k * k / (2.0 * m[a]);
      }
      kinetic_[c] = std::exp(Complex{0.0, -e * dt}) * inv_n;
    }
  }

  double dt() const { return dt_; }

  /// One Strang step in place.
  void advance(SpinorField& psi) const {
    if (!(psi.grid() == grid_) || psi.spin_dim() != spin_dim_)
      throw PreconditionError("propagator and field disagree on grid or spin dimension");
    apply_half_potential(psi);
    auto amp = psi.amplitudes();
    const auto shape = grid_.shape();
    const unsigned mask = detail::all_axes_mask(grid_);
    detail::fft_inplace(amp, shape, spin_dim_, mask, FFTW_FORWARD);
    for (std::size_t c = 0; c < kinetic_.size(); ++c)
      for (std::size_t s = 0; s < spin_dim_; ++s) amp[c * spin_dim_ + s] *= kinetic_[c];
    detail::fft_inplace(amp, shape, spin_dim_, mask, FFTW_BACKWARD);
    apply_half_potential(psi);
    for (const Complex& z : amp)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw NumericalFault("non-finite amplitude after a propagator step");
  }

  SpinorField step(SpinorField psi) const {
    advance(psi);
    return psi;
  }

 private:
  void apply_half_potential(SpinorField& psi) const {
    if (half_potential_.empty()) return;
    auto amp = psi.amplitudes();
    const std::size_t d = spin_dim_;
    if (!matrix_potential_) {
      for (std::size_t c = 0; c < half_potential_.size(); ++c)
        for (std::size_t s = 0; s < d; ++s) amp[c * d + s] *= half_potential_[c];
      return;
    }
    std::vector<Complex> tmp(d);
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
      const Complex* u = &half_potential_[c * d * d];
      Complex* x = &amp[c * d];
      for (std::size_t i = 0; i < d; ++i) {
        Complex s{};
        for (std::size_t j = 0; j < d; ++j) s += u[i * d + j] * x[j];
        tmp[i] = s;
      }
      std::copy(tmp.begin(), tmp.end(), x);
    }
  }

  Grid grid_;
  std::size_t spin_dim_;
  double dt_;
  bool matrix_potential_ = false;
  std::vector<Complex> half_potential_;
  std::vector<Complex> kinetic_;
};

inline SpinorField step(const SpinorField& psi, const HamiltonianSpec& h, double dt) {
  return SplitOperatorPropagator(h, dt).step(psi);
}

/// Time-stamped wave function snapshots, consumed by the guidance law.
class WaveEvolution {
 public:
  WaveEvolution() = default;
  WaveEvolution(Kinematics kinematics, bool free) : kinematics_(std::move(kinematics)), free_(free) {}

  void append(double t, SpinorField psi) {
    if (!times_.empty()) {
      if (!(t > times_.back())) throw PreconditionError("snapshot times must be strictly increasing");
      snapshots_.front().require_same(psi);
    }
    times_.push_back(t);
    snapshots_.push_back(std::move(psi));
  }

  /// Continue with a later segment; a leading snapshot at our final time is dropped.
  void append_segment(WaveEvolution next) {
    free_ = free_ && next.free_;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!times_.empty() && next.times_[i] <= times_.back()) continue;
      append(next.times_[i], std::move(next.snapshots_[i]));
    }
  }

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const SpinorField& snapshot(std::size_t i) const { return snapshots_.at(i); }
  const SpinorField& final_state() const { return snapshots_.back(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const Grid& grid() const { return snapshots_.front().grid(); }
  std::size_t spin_dim() const { return snapshots_.front().spin_dim(); }
  const Kinematics& kinematics() const { return kinematics_; }
  bool free_evolution() const { return free_; }

  double max_spacing() const {
    double s = 0.0;
    for (std::size_t i = 1; i < times_.size(); ++i) s = std::max(s, times_[i] - times_[i - 1]);
    return s;
  }

  /// Index of the snapshot whose time matches t within tol, if any.
  std::optional<std::size_t> find_time(double t, double tol = 1e-9) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
    if (it != times_.end() && std::abs(*it - t) <= tol) return static_cast<std::size_t>(it - times_.begin());
    return std::nullopt;
  }

 private:
  Kinematics kinematics_;
  bool free_ = true;
  std::vector<double> times_;
  std::vector<SpinorField> snapshots_;
};

/**
 * Evolve psi0 from t_start to t_start + t_final. The step count is rounded up
 * to a multiple of snapshot_stride (when it exceeds one stride), so the
 * effective step divides t_final exactly, never exceeds config.dt, and the
 * snapshots stored every snapshot_stride steps are evenly spaced.
 */
inline WaveEvolution evolve(const SpinorField& psi0, const HamiltonianSpec& h, double t_final,
                            const PropagatorConfig& config, double t_start = 0.0) {
  if (!(t_final > 0.0)) throw PreconditionError("evolve: t_final must be > 0");
  if (config.snapshot_stride == 0) throw PreconditionError("evolve: snapshot stride must be >= 1");
  auto steps = static_cast<std::size_t>(std::ceil(t_final / std::abs(config.dt) - 1e-9));
  // Round up to whole strides so that snapshots are evenly spaced.
  const std::size_t stride = config.snapshot_stride;
  if (steps > stride) steps = (steps + stride - 1) / stride * stride;
  const double dt = t_final / static_cast<double>(steps);
  SplitOperatorPropagator prop(h, dt);
  WaveEvolution out(h.kinematics(), h.is_free());
  SpinorField psi = psi0;
  out.append(t_start, psi);
  for (std::size_t n = 1; n <= steps; ++n) {
    prop.advance(psi);
    if (n % stride == 0 || n == steps)
      out.append(t_start + t_final * static_cast<double>(n) / static_cast<double>(steps), psi);
  }
  const double edge = boundary_density_ratio(out.final_state());
  if (edge > 1e-8) {
    std::ostringstream os;
    os << "boundary density reached " << edge << " of the peak; the grid extent may be too small";
    warn(os.str());
  }
  return out;
}

/// Time reversal acts on wave functions by complex conjugation.
inline SpinorField time_reverse(const SpinorField& psi) { return conjugate(psi); }

}  // namespace pilotwave
