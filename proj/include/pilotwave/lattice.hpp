// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file lattice.hpp
 * @brief Rectangular grids and spinor-valued wave functions on them.
 *
 * Layout: cells are stored row-major (the last axis varies fastest) and the
 * spin components of a cell are contiguous, so amplitude (cell, s) lives at
 * cell * spin_dim + s. Cell i of an axis sits at origin + i * spacing and
 * represents the interval [x_i - h/2, x_i + h/2).
 *
 * Spectral images use the usual DFT ordering: index j carries wavenumber
 * 2*pi*j/L for j < n/2 and 2*pi*(j - n)/L otherwise, so the Nyquist mode is
 * stored as the most negative wavenumber. Forward and inverse transforms are
 * both scaled by 1/sqrt(cells), which makes them unitary.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pilotwave/core.hpp"
#include "pilotwave/fft.hpp"

namespace pilotwave {

struct Axis {
  double extent = 0.0;
  std::size_t points = 0;
  bool periodic = true;
  double origin = 0.0;

  double spacing() const { return extent / static_cast<double>(points); }
  double coordinate(std::size_t i) const { return origin + static_cast<double>(i) * spacing(); }

  /// Centered axis: cells symmetric about zero, with zero itself a grid point.
  static Axis centered(double extent, std::size_t points, bool periodic = true) {
    return Axis{extent, points, periodic, -0.5 * extent};
  }

  friend bool operator==(const Axis&, const Axis&) = default;
};

/// Upper bound on cells * spin_dim for any field; 2^24 complex values is 256 MiB.
inline constexpr std::size_t kDefaultMemoryCap = std::size_t{1} << 24;
inline constexpr std::size_t kMaxAxes = 3;

class Grid {
 public:
  Grid() = default;

  explicit Grid(std::vector<Axis> axes, std::size_t memory_cap = kDefaultMemoryCap)
      : axes_(std::move(axes)), memory_cap_(memory_cap) {
    if (axes_.empty() || axes_.size() > kMaxAxes)
      throw PreconditionError("grid needs between 1 and 3 axes");
    cells_ = 1;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const Axis& ax = axes_[a];
      if (!(ax.extent > 0.0) || !std::isfinite(ax.extent))
        throw PreconditionError("axis " + std::to_string(a) + ": extent must be > 0");
      if (ax.points < 8 || !std::has_single_bit(ax.points))
        throw PreconditionError("axis " + std::to_string(a) + ": points must be a power of two >= 8, got " +
                                std::to_string(ax.points));
      cells_ *= ax.points;
    }
    if (cells_ > memory_cap_)
      throw PreconditionError("grid of " + std::to_string(cells_) + " cells exceeds the memory cap of " +
                              std::to_string(memory_cap_) + " values");
    strides_.assign(axes_.size(), 1);
    for (std::size_t a = axes_.size() - 1; a > 0; --a) strides_[a - 1] = strides_[a] * axes_[a].points;
  }

  std::size_t rank() const { return axes_.size(); }
  const Axis& axis(std::size_t a) const { return axes_.at(a); }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t cell_count() const { return cells_; }
  std::size_t stride(std::size_t a) const { return strides_[a]; }
  std::size_t memory_cap() const { return memory_cap_; }

  std::vector<std::size_t> shape() const {
    std::vector<std::size_t> s;
    for (const auto& ax : axes_) s.push_back(ax.points);
    return s;
  }

  double cell_volume() const {
    double v = 1.0;
    for (const auto& ax : axes_) v *= ax.spacing();
    return v;
  }

  std::size_t axis_index(std::size_t cell, std::size_t a) const {
    return (cell / strides_[a]) % axes_[a].points;
  }

  void cell_coordinates(std::size_t cell, std::span<double> out) const {
    for (std::size_t a = 0; a < axes_.size(); ++a) out[a] = axes_[a].coordinate(axis_index(cell, a));
  }

  std::vector<double> cell_coordinates(std::size_t cell) const {
    std::vector<double> q(rank());
    cell_coordinates(cell, q);
    return q;
  }

  /// Wavenumber carried by spectral index j on axis a.
  double wavenumber(std::size_t a, std::size_t j) const {
    const Axis& ax = axes_[a];
    const auto n = static_cast<std::ptrdiff_t>(ax.points);
    auto jj = static_cast<std::ptrdiff_t>(j);
    if (jj >= n / 2) jj -= n;
    return 2.0 * kPi * static_cast<double>(jj) / ax.extent;
  }

  /// Grid made of a subset of this grid's axes, in the given order.
  Grid subgrid(const std::vector<std::size_t>& which) const {
    std::vector<Axis> sub;
    for (auto a : which) sub.push_back(axis(a));
    return Grid(std::move(sub), memory_cap_);
  }

  friend bool operator==(const Grid& a, const Grid& b) { return a.axes_ == b.axes_; }

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 0;
  std::size_t memory_cap_ = kDefaultMemoryCap;
};

inline Grid make_grid(std::vector<Axis> axes, std::size_t memory_cap = kDefaultMemoryCap) {
  return Grid(std::move(axes), memory_cap);
}

class SpinorField {
 public:
  SpinorField() = default;

  SpinorField(Grid grid, std::size_t spin_dim = 1) : grid_(std::move(grid)), spin_dim_(spin_dim) {
    check_size();
    amplitudes_.assign(grid_.cell_count() * spin_dim_, Complex{});
  }

  SpinorField(Grid grid, std::size_t spin_dim, std::vector<Complex> amplitudes)
      : grid_(std::move(grid)), spin_dim_(spin_dim), amplitudes_(std::move(amplitudes)) {
    check_size();
    if (amplitudes_.size() != grid_.cell_count() * spin_dim_)
      throw PreconditionError("amplitude array length must equal cells * spin_dim");
  }

  /// Fill from fn(coordinates, spin_out) evaluated at every cell.
  template <class Fn>
  static SpinorField sample(const Grid& grid, std::size_t spin_dim, Fn&& fn) {
    SpinorField f(grid, spin_dim);
    std::vector<double> q(grid.rank());
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      grid.cell_coordinates(c, q);
      fn(std::span<const double>(q), std::span<Complex>(f.amplitudes_.data() + c * spin_dim, spin_dim));
    }
    return f;
  }

  /// Scalar field from fn(coordinates) -> Complex.
  template <class Fn>
  static SpinorField scalar(const Grid& grid, Fn&& fn) {
    return sample(grid, 1, [&](std::span<const double> q, std::span<Complex> out) { out[0] = fn(q); });
  }

  const Grid& grid() const { return grid_; }
  std::size_t spin_dim() const { return spin_dim_; }
  std::size_t cell_count() const { return grid_.cell_count(); }

  std::span<const Complex> amplitudes() const { return amplitudes_; }
  std::span<Complex> amplitudes() { return amplitudes_; }

  Complex operator()(std::size_t cell, std::size_t s = 0) const { return amplitudes_[cell * spin_dim_ + s]; }
  Complex& operator()(std::size_t cell, std::size_t s = 0) { return amplitudes_[cell * spin_dim_ + s]; }

  bool same_shape(const SpinorField& other) const {
    return spin_dim_ == other.spin_dim_ && grid_ == other.grid_;
  }

  SpinorField& operator+=(const SpinorField& other) {
    require_same(other);
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) amplitudes_[i] += other.amplitudes_[i];
    return *this;
  }
  SpinorField& operator-=(const SpinorField& other) {
    require_same(other);
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) amplitudes_[i] -= other.amplitudes_[i];
    return *this;
  }
  SpinorField& operator*=(Complex z) {
    for (auto& a : amplitudes_) a *= z;
    return *this;
  }

  friend SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
  friend SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
  friend SpinorField operator*(Complex z, SpinorField a) { return a *= z; }

  void require_same(const SpinorField& other) const {
    if (!same_shape(other)) throw PreconditionError("fields live on different grids or spin dimensions");
  }

 private:
  void check_size() const {
    if (spin_dim_ == 0) throw PreconditionError("spin_dim must be >= 1");
    if (grid_.cell_count() * spin_dim_ > grid_.memory_cap())
      throw PreconditionError("field of " + std::to_string(grid_.cell_count() * spin_dim_) +
                              " values exceeds the memory cap");
  }

  Grid grid_;
  std::size_t spin_dim_ = 1;
  std::vector<Complex> amplitudes_;
};

struct DensityField {
  Grid grid;
  std::vector<double> values;

  double integral() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * grid.cell_volume();
  }
  double max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
};

namespace detail {

/// Spin-space scalar product conj(a) . b over d components, written out so the
/// a == b case performs exactly the same operations as the density.
inline Complex spin_dot(const Complex* a, const Complex* b, std::size_t d) {
  double re = 0.0, im = 0.0;
  for (std::size_t s = 0; s < d; ++s) {
    const double ar = a[s].real(), ai = a[s].imag(), br = b[s].real(), bi = b[s].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

inline double spin_norm2(const Complex* a, std::size_t d) {
  double re = 0.0;
  for (std::size_t s = 0; s < d; ++s) {
    const double ar = a[s].real(), ai = a[s].imag();
    re += ar * ar + ai * ai;
  }
  return re;
}

inline unsigned all_axes_mask(const Grid& g) { return (1u << g.rank()) - 1u; }

}  // namespace detail

/// Spin-contracted scalar product integrated with the cell-volume weight.
inline Complex inner_product(const SpinorField& psi, const SpinorField& phi) {
  psi.require_same(phi);
  const std::size_t d = psi.spin_dim();
  const auto a = psi.amplitudes();
  const auto b = phi.amplitudes();
  Complex acc{};
  for (std::size_t c = 0; c < psi.cell_count(); ++c) acc += detail::spin_dot(&a[c * d], &b[c * d], d);
  return acc * psi.grid().cell_volume();
}

inline DensityField density(const SpinorField& psi) {
  const std::size_t d = psi.spin_dim();
  const auto a = psi.amplitudes();
  DensityField rho{psi.grid(), std::vector<double>(psi.cell_count())};
  for (std::size_t c = 0; c < psi.cell_count(); ++c) rho.values[c] = detail::spin_norm2(&a[c * d], d);
  return rho;
}

inline double norm(const SpinorField& psi) { return std::sqrt(inner_product(psi, psi).real()); }

inline SpinorField normalize(SpinorField psi) {
  const double n = norm(psi);
  if (!(n > 0.0) || !std::isfinite(n)) throw PreconditionError("cannot normalize a field of zero or non-finite norm");
  psi *= Complex{1.0 / n, 0.0};
  return psi;
}

/// Complex conjugate of every amplitude.
inline SpinorField conjugate(SpinorField psi) {
  for (auto& a : psi.amplitudes()) a = std::conj(a);
  return psi;
}

/// Largest density on any face of the grid, relative to the largest density overall.
inline double boundary_density_ratio(const SpinorField& psi) {
  const auto rho = density(psi);
  const double peak = rho.max();
  if (peak == 0.0) return 0.0;
  const Grid& g = psi.grid();
  double edge = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    for (std::size_t a = 0; a < g.rank(); ++a) {
      const std::size_t i = g.axis_index(c, a);
      if (i == 0 || i + 1 == g.axis(a).points) {
        edge = std::max(edge, rho.values[c]);
        break;
      }
    }
  }
  return edge / peak;
}

inline SpinorField spectral_transform(SpinorField psi) {
  const Grid& g = psi.grid();
  detail::fft_inplace(psi.amplitudes(), g.shape(), psi.spin_dim(), detail::all_axes_mask(g), FFTW_FORWARD);
  psi *= Complex{1.0 / std::sqrt(static_cast<double>(g.cell_count())), 0.0};
  return psi;
}

inline SpinorField inverse_spectral_transform(SpinorField psi) {
  const Grid& g = psi.grid();
  detail::fft_inplace(psi.amplitudes(), g.shape(), psi.spin_dim(), detail::all_axes_mask(g), FFTW_BACKWARD);
  psi *= Complex{1.0 / std::sqrt(static_cast<double>(g.cell_count())), 0.0};
  return psi;
}

/**
 * Spectral derivative along one axis: multiply the axis transform by i*k.
 *
 * The Nyquist coefficient is dropped, so real input gives real output. On a
 * non-periodic axis the field must already be negligible at both ends
 * (below 1e-8 of its peak modulus); it is then treated as periodic.
 */
inline SpinorField gradient(SpinorField psi, std::size_t axis) {
  const Grid& g = psi.grid();
  if (axis >= g.rank()) throw PreconditionError("gradient: axis out of range");
  const Axis& ax = g.axis(axis);
  const std::size_t d = psi.spin_dim();
  if (!ax.periodic) {
    double peak = 0.0, edge = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const std::size_t i = g.axis_index(c, axis);
      for (std::size_t s = 0; s < d; ++s) {
        const double m = std::abs(psi(c, s));
        peak = std::max(peak, m);
        if (i == 0 || i + 1 == ax.points) edge = std::max(edge, m);
      }
    }
    if (edge > 1e-8 * peak) {
      std::ostringstream os;
      os << "gradient: boundary amplitude " << edge << " on non-periodic axis " << axis
         << " exceeds 1e-8 of the peak " << peak;
      throw PreconditionError(os.str());
    }
  }
  detail::fft_inplace(psi.amplitudes(), g.shape(), d, 1u << axis, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(ax.points);
  std::vector<Complex> factor(ax.points);
  for (std::size_t j = 0; j < ax.points; ++j)
    factor[j] = (j == ax.points / 2) ? Complex{} : Complex{0.0, g.wavenumber(axis, j) * scale};
  auto amp = psi.amplitudes();
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const Complex f = factor[g.axis_index(c, axis)];
    for (std::size_t s = 0; s < d; ++s) amp[c * d + s] *= f;
  }
  detail::fft_inplace(amp, g.shape(), d, 1u << axis, FFTW_BACKWARD);
  return psi;
}

}  // namespace pilotwave
