// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file interpolation.hpp
 * @brief Separable Catmull-Rom interpolation of grid fields.
 *
 * Each axis contributes a four-point stencil. Periodic axes wrap; on a
 * non-periodic axis the point must lie between the first and last cell
 * coordinate, and the missing outer neighbour is a linear extrapolation, so
 * linear fields are reproduced up to the edges.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "pilotwave/lattice.hpp"

namespace pilotwave {

struct AxisStencil {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
};

inline std::array<double, 4> catmull_rom_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
          0.5 * (t3 - t2)};
}

inline AxisStencil axis_stencil(const Axis& ax, double x) {
  const double h = ax.spacing();
  const double u = (x - ax.origin) / h;
  const auto n = static_cast<std::ptrdiff_t>(ax.points);
  AxisStencil st;
  if (ax.periodic) {
    const double fl = std::floor(u);
    const double t = u - fl;
    st.weight = catmull_rom_weights(t);
    auto base = static_cast<std::ptrdiff_t>(fl);
    for (std::ptrdiff_t k = 0; k < 4; ++k) {
      std::ptrdiff_t i = (base - 1 + k) % n;
      if (i < 0) i += n;
      st.index[k] = static_cast<std::size_t>(i);
    }
    return st;
  }
  if (!(u >= 0.0) || u > static_cast<double>(n - 1))
    throw PreconditionError("interpolation point lies outside a non-periodic axis");
  auto base = std::min(static_cast<std::ptrdiff_t>(std::floor(u)), n - 2);
  const double t = u - static_cast<double>(base);
  auto w = catmull_rom_weights(t);
  // Ghost nodes: f(-1) = 2 f(0) - f(1) and f(n) = 2 f(n-1) - f(n-2).
  std::array<std::ptrdiff_t, 4> idx{base - 1, base, base + 1, base + 2};
  if (idx[0] < 0) {
    w[1] += 2.0 * w[0];
    w[2] -= w[0];
    w[0] = 0.0;
    idx[0] = 0;
  }
  if (idx[3] > n - 1) {
    w[2] += 2.0 * w[3];
    w[1] -= w[3];
    w[3] = 0.0;
    idx[3] = n - 1;
  }
  for (int k = 0; k < 4; ++k) st.index[k] = static_cast<std::size_t>(idx[k]);
  st.weight = w;
  return st;
}

/// Stencils for every axis of a grid at one point.
struct PointStencil {
  std::array<AxisStencil, kMaxAxes> axes{};
  std::size_t rank = 0;

  PointStencil(const Grid& grid, std::span<const double> q) : rank(grid.rank()) {
    for (std::size_t a = 0; a < rank; ++a) axes[a] = axis_stencil(grid.axis(a), q[a]);
  }

  /// out[s] = sum over stencil nodes of weight * field(node, s).
  void apply(const Grid& grid, std::span<const Complex> values, std::size_t spin_dim, std::span<Complex> out) const {
    for (std::size_t s = 0; s < spin_dim; ++s) out[s] = Complex{};
    const std::size_t s0 = grid.stride(0);
    if (rank == 1) {
      for (int i = 0; i < 4; ++i) {
        const double w = axes[0].weight[i];
        const Complex* p = &values[axes[0].index[i] * s0 * spin_dim];
        for (std::size_t s = 0; s < spin_dim; ++s) out[s] += w * p[s];
      }
      return;
    }
    const std::size_t s1 = grid.stride(1);
    if (rank == 2) {
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const double w = axes[0].weight[i] * axes[1].weight[j];
          const Complex* p = &values[(axes[0].index[i] * s0 + axes[1].index[j] * s1) * spin_dim];
          for (std::size_t s = 0; s < spin_dim; ++s) out[s] += w * p[s];
        }
      return;
    }
    const std::size_t s2 = grid.stride(2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          const double w = axes[0].weight[i] * axes[1].weight[j] * axes[2].weight[k];
          const Complex* p =
              &values[(axes[0].index[i] * s0 + axes[1].index[j] * s1 + axes[2].index[k] * s2) * spin_dim];
          for (std::size_t s = 0; s < spin_dim; ++s) out[s] += w * p[s];
        }
  }
};

/// Interpolated spin components of psi at point q.
inline std::vector<Complex> interpolate(const SpinorField& psi, std::span<const double> q) {
  if (q.size() != psi.grid().rank()) throw PreconditionError("interpolate: point has the wrong dimension");
  std::vector<Complex> out(psi.spin_dim());
  PointStencil(psi.grid(), q).apply(psi.grid(), psi.amplitudes(), psi.spin_dim(), out);
  return out;
}

}  // namespace pilotwave
