// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file ensembles.hpp
 * @brief Born-rule ensembles and the statistics built on them.
 *
 * Sampling treats the density as piecewise constant per cell: a member picks a
 * cell by inverse CDF over the cell weights, then a uniform point inside it.
 * Member i draws only from its own counter stream, so an ensemble depends on
 * (field, n, seed) and nothing else.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pilotwave/guidance.hpp"
#include "pilotwave/lattice.hpp"
#include "pilotwave/parallel.hpp"
#include "pilotwave/rng.hpp"

namespace pilotwave {

struct Ensemble {
  std::vector<Configuration> members;
  std::uint64_t seed = 0;
  std::string source;

  std::size_t size() const { return members.size(); }
  const Configuration& operator[](std::size_t i) const { return members[i]; }
};

inline constexpr std::uint32_t kBornStream = stream_label("born");

/**
 * n members distributed by the cell weights of |psi|^2, jittered uniformly
 * within the chosen cell. Jitter on a non-periodic axis is clamped to the
 * axis extent.
 */
inline Ensemble sample_born(const SpinorField& psi, std::size_t n, std::uint64_t seed, unsigned workers = 1) {
  if (n == 0) throw PreconditionError("sample_born: n must be >= 1");
  const Grid& g = psi.grid();
  const auto rho = density(psi);
  std::vector<double> cdf(rho.values.size());
  std::partial_sum(rho.values.begin(), rho.values.end(), cdf.begin());
  const double total = cdf.back();
  if (!(total > 0.0) || !std::isfinite(total)) throw PreconditionError("sample_born: density has no mass");
  Ensemble out{std::vector<Configuration>(n), seed, "born(|psi|^2 cell weights, uniform in-cell jitter)"};
  parallel_for(n, workers, [&](std::size_t i) {
    CounterRng rng(seed, kBornStream, i);
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // Skip zero-weight cells that share the cumulative value.
    std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    while (rho.values[cell] == 0.0 && cell > 0) --cell;
    Configuration q{g.cell_coordinates(cell)};
    for (std::size_t a = 0; a < g.rank(); ++a) {
      const Axis& ax = g.axis(a);
      q[a] += (rng.uniform() - 0.5) * ax.spacing();
      if (!ax.periodic) q[a] = std::clamp(q[a], ax.origin, ax.coordinate(ax.points - 1));
    }
    out.members[i] = std::move(q);
  });
  return out;
}

/**
 * Integrate every member through the guidance field from `t_start` (default:
 * the start of the evolution) to time t. Trajectory exits propagate.
 */
inline std::vector<Trajectory> integrate_ensemble(const GuidanceField& field, const Ensemble& ensemble, double t,
                                                  double rk_dt, const NodeGuard& guard = {}, unsigned workers = 1,
                                                  bool store_path = false, double t_start = NAN) {
  if (std::isnan(t_start)) t_start = field.evolution().t_begin();
  std::vector<Trajectory> out(ensemble.size());
  parallel_for(ensemble.size(), workers, [&](std::size_t i) {
    out[i] = integrate_trajectory(field, ensemble[i], t - t_start, rk_dt, guard, t_start, store_path);
  });
  return out;
}

inline Ensemble push_forward(const GuidanceField& field, const Ensemble& ensemble, double t, double rk_dt,
                             const NodeGuard& guard = {}, unsigned workers = 1, double t_start = NAN) {
  const auto trajs = integrate_ensemble(field, ensemble, t, rk_dt, guard, workers, false, t_start);
  Ensemble out{{}, ensemble.seed, ensemble.source + " pushed to t=" + std::to_string(t)};
  out.members.reserve(trajs.size());
  for (const auto& tr : trajs) out.members.push_back(tr.final_configuration());
  return out;
}

// ---------------------------------------------------------------------------
// Binning and distances
// ---------------------------------------------------------------------------

/// Rectangular bins over a subset of grid axes (the rest are marginalized).
struct BinSpec {
  std::vector<std::size_t> axes;
  std::vector<double> lo, hi;
  std::vector<std::size_t> counts;

  std::size_t bin_count() const {
    std::size_t n = 1;
    for (auto c : counts) n *= c;
    return n;
  }
  double width(std::size_t k) const { return (hi[k] - lo[k]) / static_cast<double>(counts[k]); }

  /// The grid cells themselves in 1D, 64 bins per axis in 2D, 16 per axis in 3D.
  static BinSpec grid_default(const Grid& g) {
    BinSpec b;
    for (std::size_t a = 0; a < g.rank(); ++a) {
      const Axis& ax = g.axis(a);
      b.axes.push_back(a);
      b.lo.push_back(ax.origin - 0.5 * ax.spacing());
      b.hi.push_back(b.lo.back() + ax.extent);
      const std::size_t want = g.rank() == 1 ? ax.points : (g.rank() == 2 ? 64 : 16);
      b.counts.push_back(std::min(want, ax.points));
    }
    return b;
  }

  /// Bins along a single axis.
  static BinSpec marginal(std::size_t axis, double lo, double hi, std::size_t count) {
    return BinSpec{{axis}, {lo}, {hi}, {count}};
  }

  void validate(const Grid& g) const {
    if (axes.empty() || axes.size() != lo.size() || axes.size() != hi.size() || axes.size() != counts.size())
      throw PreconditionError("bin spec: inconsistent axis lists");
    for (std::size_t k = 0; k < axes.size(); ++k) {
      if (axes[k] >= g.rank()) throw PreconditionError("bin spec: axis out of range");
      if (!(hi[k] > lo[k]) || counts[k] == 0) throw PreconditionError("bin spec: empty bin range");
    }
  }
};

struct DistanceReport {
  double time = 0.0;
  double total_variation = 0.0;
  std::vector<double> ks_per_axis;
  std::size_t sample_count = 0;
  BinSpec bins;
  double tv_bound = 0.0;          ///< 3 x expected multinomial TV for these bins and n
  double outside_fraction = 0.0;  ///< members falling outside the bin range
  bool pass = false;
};

namespace detail {

/// Coordinate folded into the bin range when the axis is periodic.
inline double fold(const Axis& ax, double x, double lo) {
  if (!ax.periodic) return x;
  return lo + std::fmod(std::fmod(x - lo, ax.extent) + ax.extent, ax.extent);
}

inline std::ptrdiff_t bin_index(const BinSpec& b, std::size_t k, double x) {
  const double u = (x - b.lo[k]) / b.width(k);
  if (!(u >= 0.0) || u >= static_cast<double>(b.counts[k])) return -1;
  return static_cast<std::ptrdiff_t>(u);
}

}  // namespace detail

/**
 * Probability of each bin under the density, with the density uniform within
 * each cell. Returns unnormalized masses (sum = mass inside the bin range).
 */
inline std::vector<double> binned_density(const DensityField& rho, const BinSpec& bins) {
  const Grid& g = rho.grid;
  bins.validate(g);
  const std::size_t nb = bins.axes.size();
  // Per binned axis: for each grid index, the overlapping bins and fractions.
  struct Piece {
    std::size_t bin;
    double frac;
  };
  std::vector<std::vector<std::vector<Piece>>> pieces(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Axis& ax = g.axis(bins.axes[k]);
    const double h = ax.spacing();
    pieces[k].resize(ax.points);
    for (std::size_t i = 0; i < ax.points; ++i) {
      double a = ax.coordinate(i) - 0.5 * h;
      if (ax.periodic) a = detail::fold(ax, a, bins.lo[k]);
      // A cell may straddle the folding seam; treat it as two intervals.
      std::vector<std::pair<double, double>> spans{{a, a + h}};
      if (ax.periodic && a + h > bins.lo[k] + ax.extent)
        spans = {{a, bins.lo[k] + ax.extent}, {bins.lo[k], a + h - ax.extent}};
      const double w = bins.width(k);
      for (auto [s0, s1] : spans) {
        const auto first = static_cast<std::ptrdiff_t>(std::floor((s0 - bins.lo[k]) / w));
        const auto last = static_cast<std::ptrdiff_t>(std::floor((s1 - bins.lo[k]) / w));
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(first, 0);
             j <= std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(bins.counts[k]) - 1); ++j) {
          const double b0 = bins.lo[k] + static_cast<double>(j) * w;
          const double overlap = std::min(s1, b0 + w) - std::max(s0, b0);
          if (overlap > 0.0) pieces[k][i].push_back({static_cast<std::size_t>(j), overlap / h});
        }
      }
    }
  }
  std::vector<double> out(bins.bin_count(), 0.0);
  const double dv = g.cell_volume();
  std::vector<std::size_t> idx(nb);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double m = rho.values[c] * dv;
    if (m == 0.0) continue;
    if (nb == 1) {
      for (const auto& p : pieces[0][g.axis_index(c, bins.axes[0])]) out[p.bin] += m * p.frac;
    } else if (nb == 2) {
      for (const auto& p0 : pieces[0][g.axis_index(c, bins.axes[0])])
        for (const auto& p1 : pieces[1][g.axis_index(c, bins.axes[1])])
          out[p0.bin * bins.counts[1] + p1.bin] += m * p0.frac * p1.frac;
    } else {
      for (const auto& p0 : pieces[0][g.axis_index(c, bins.axes[0])])
        for (const auto& p1 : pieces[1][g.axis_index(c, bins.axes[1])])
          for (const auto& p2 : pieces[2][g.axis_index(c, bins.axes[2])])
            out[(p0.bin * bins.counts[1] + p1.bin) * bins.counts[2] + p2.bin] += m * p0.frac * p1.frac * p2.frac;
    }
  }
  return out;
}

/// Member counts per bin; members outside the range are counted in `outside`.
inline std::vector<std::size_t> histogram(const Grid& g, const Ensemble& e, const BinSpec& bins,
                                          std::size_t* outside = nullptr) {
  bins.validate(g);
  std::vector<std::size_t> counts(bins.bin_count(), 0);
  std::size_t out_of_range = 0;
  for (const auto& q : e.members) {
    std::size_t flat = 0;
    bool inside = true;
    for (std::size_t k = 0; k < bins.axes.size() && inside; ++k) {
      const double x = detail::fold(g.axis(bins.axes[k]), q[bins.axes[k]], bins.lo[k]);
      const auto j = detail::bin_index(bins, k, x);
      if (j < 0) inside = false;
      flat = flat * bins.counts[k] + static_cast<std::size_t>(std::max<std::ptrdiff_t>(j, 0));
    }
    if (inside)
      ++counts[flat];
    else
      ++out_of_range;
  }
  if (outside) *outside = out_of_range;
  return counts;
}

/// Expected total variation between a multinomial(n, p) sample and p, for large n.
inline double expected_multinomial_tv(std::span<const double> p, std::size_t n) {
  double s = 0.0;
  for (double pi : p) s += std::sqrt(2.0 * pi * (1.0 - pi) / (kPi * static_cast<double>(n)));
  return 0.5 * s;
}

/**
 * Kolmogorov-Smirnov distance between the samples and a piecewise-linear CDF
 * given by cell masses on cells [edges[j], edges[j+1]).
 */
inline double ks_distance(std::vector<double> samples, std::span<const double> edges, std::span<const double> mass) {
  if (samples.empty()) return 1.0;
  std::sort(samples.begin(), samples.end());
  std::vector<double> cdf(mass.size() + 1, 0.0);
  for (std::size_t j = 0; j < mass.size(); ++j) cdf[j + 1] = cdf[j] + mass[j];
  const double total = cdf.back();
  auto model = [&](double x) {
    if (x <= edges.front()) return 0.0;
    if (x >= edges.back()) return 1.0;
    const auto j = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()) - 1;
    const double f = (x - edges[j]) / (edges[j + 1] - edges[j]);
    return (cdf[j] + f * mass[j]) / total;
  };
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = model(samples[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

/// KS distance per grid axis between the ensemble's marginals and those of rho.
inline std::vector<double> ks_per_axis(const DensityField& rho, const Ensemble& e) {
  const Grid& g = rho.grid;
  std::vector<double> out;
  for (std::size_t a = 0; a < g.rank(); ++a) {
    const Axis& ax = g.axis(a);
    std::vector<double> mass(ax.points, 0.0), edges(ax.points + 1);
    for (std::size_t c = 0; c < g.cell_count(); ++c) mass[g.axis_index(c, a)] += rho.values[c];
    const double lo = ax.origin - 0.5 * ax.spacing();
    for (std::size_t i = 0; i <= ax.points; ++i) edges[i] = lo + static_cast<double>(i) * ax.spacing();
    std::vector<double> xs;
    xs.reserve(e.size());
    for (const auto& q : e.members) xs.push_back(detail::fold(ax, q[a], lo));
    out.push_back(ks_distance(std::move(xs), edges, mass));
  }
  return out;
}

/// Compare an ensemble with a density over the given bins.
inline DistanceReport compare_to_density(const DensityField& rho, const Ensemble& e, const BinSpec& bins,
                                         double time = 0.0) {
  DistanceReport r;
  r.time = time;
  r.bins = bins;
  r.sample_count = e.size();
  auto p = binned_density(rho, bins);
  const double pin = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(pin > 0.0)) throw PreconditionError("density has no mass inside the bin range");
  for (auto& v : p) v /= pin;
  std::size_t outside = 0;
  const auto counts = histogram(rho.grid, e, bins, &outside);
  const std::size_t inside = e.size() - outside;
  r.outside_fraction = static_cast<double>(outside) / static_cast<double>(e.size());
  double tv = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    const double emp = inside ? static_cast<double>(counts[b]) / static_cast<double>(inside) : 0.0;
    tv += std::abs(emp - p[b]);
  }
  r.total_variation = inside ? 0.5 * tv : 1.0;
  r.tv_bound = 3.0 * expected_multinomial_tv(p, std::max<std::size_t>(inside, 1));
  r.ks_per_axis = ks_per_axis(rho, e);
  r.pass = r.total_variation <= r.tv_bound;
  return r;
}

struct EquivarianceOptions {
  double rk_dt = 0.0;  ///< 0 selects the snapshot spacing
  NodeGuard guard;
  unsigned workers = 1;
  bool frozen = false;  ///< negative control: members never move
};

/**
 * Sample |psi(t0)|^2 from the first snapshot, push the ensemble to each of
 * `times` and compare with the density of the snapshot stored at that time.
 */
inline std::vector<DistanceReport> equivariance_check(const GuidanceField& field, std::size_t n,
                                                      std::span<const double> times, const BinSpec& bins,
                                                      std::uint64_t seed, const EquivarianceOptions& opt = {}) {
  const WaveEvolution& evo = field.evolution();
  const double rk = opt.rk_dt > 0.0 ? opt.rk_dt : (evo.size() > 1 ? evo.max_spacing() : 1.0);
  Ensemble current = sample_born(evo.snapshot(0), n, seed, opt.workers);
  double t_now = evo.t_begin();
  std::vector<DistanceReport> out;
  for (double t : times) {
    const auto idx = evo.find_time(t);
    if (!idx) throw PreconditionError("equivariance_check: no snapshot at t = " + std::to_string(t));
    if (t < t_now) throw PreconditionError("equivariance_check: times must be increasing");
    if (!opt.frozen && t > t_now) current = push_forward(field, current, t, rk, opt.guard, opt.workers, t_now);
    t_now = t;
    out.push_back(compare_to_density(density(evo.snapshot(*idx)), current, bins, t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Typicality, conditional wave functions, branches
// ---------------------------------------------------------------------------

/**
 * |Psi|^2 measure of the set where `predicate` holds, by cell quadrature.
 * Each cell is split into `subdivisions` parts per axis and the predicate is
 * evaluated at the part midpoints.
 */
inline double typicality_measure(const SpinorField& psi, const std::function<bool(const Configuration&)>& predicate,
                                 std::size_t subdivisions = 1) {
  if (subdivisions == 0) throw PreconditionError("typicality_measure: subdivisions must be >= 1");
  const Grid& g = psi.grid();
  const auto rho = density(psi);
  const std::size_t r = g.rank();
  std::size_t parts = 1;
  for (std::size_t a = 0; a < r; ++a) parts *= subdivisions;
  double inside = 0.0, total = 0.0;
  Configuration q{std::vector<double>(r)};
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double m = rho.values[c];
    total += m;
    if (m == 0.0) continue;
    std::size_t hits = 0;
    for (std::size_t p = 0; p < parts; ++p) {
      std::size_t rem = p;
      for (std::size_t a = 0; a < r; ++a) {
        const std::size_t s = rem % subdivisions;
        rem /= subdivisions;
        const double h = g.axis(a).spacing();
        q[a] = g.axis(a).coordinate(g.axis_index(c, a)) - 0.5 * h +
               (static_cast<double>(s) + 0.5) * h / static_cast<double>(subdivisions);
      }
      if (predicate(q)) ++hits;
    }
    inside += m * static_cast<double>(hits) / static_cast<double>(parts);
  }
  if (!(total > 0.0)) throw PreconditionError("typicality_measure: field has no mass");
  return inside / total;
}

/**
 * psi(x, Y) as a normalized field over the remaining axes, with Y the values
 * of the `environment_axes`. Off-grid Y uses Catmull-Rom interpolation along
 * the environment axes only.
 */
inline SpinorField conditional_wave_function(const SpinorField& psi, const std::vector<std::size_t>& environment_axes,
                                             std::span<const double> environment_values) {
  const Grid& g = psi.grid();
  if (psi.spin_dim() != 1) throw PreconditionError("conditional wave function requires spin_dim 1");
  if (environment_axes.empty() || environment_axes.size() >= g.rank() ||
      environment_axes.size() != environment_values.size())
    throw PreconditionError("conditional wave function: bad environment axes");
  std::vector<bool> is_env(g.rank(), false);
  for (auto a : environment_axes) {
    if (a >= g.rank() || is_env[a]) throw PreconditionError("conditional wave function: bad environment axes");
    is_env[a] = true;
  }
  std::vector<std::size_t> system_axes;
  for (std::size_t a = 0; a < g.rank(); ++a)
    if (!is_env[a]) system_axes.push_back(a);
  const Grid sub = g.subgrid(system_axes);

  // Environment stencil: offsets into the full array and weights.
  std::vector<std::pair<std::size_t, double>> env{{0, 1.0}};
  for (std::size_t k = 0; k < environment_axes.size(); ++k) {
    const std::size_t a = environment_axes[k];
    const AxisStencil st = axis_stencil(g.axis(a), environment_values[k]);
    std::vector<std::pair<std::size_t, double>> next;
    for (const auto& [off, w] : env)
      for (int i = 0; i < 4; ++i)
        if (st.weight[i] != 0.0) next.push_back({off + st.index[i] * g.stride(a), w * st.weight[i]});
    env.swap(next);
  }

  SpinorField out(sub, 1);
  for (std::size_t c = 0; c < sub.cell_count(); ++c) {
    std::size_t base = 0;
    for (std::size_t k = 0; k < system_axes.size(); ++k) base += sub.axis_index(c, k) * g.stride(system_axes[k]);
    Complex z{};
    for (const auto& [off, w] : env) z += w * psi(base + off);
    out(c) = z;
  }
  const double n = norm(out);
  if (!(n >= 1e-14)) throw PreconditionError("conditional wave function: slice norm vanishes at this Y");
  out *= Complex{1.0 / n, 0.0};
  return out;
}

/// |<a|b>| for normalized fields.
inline double fidelity(const SpinorField& a, const SpinorField& b) {
  return std::abs(inner_product(a, b)) / (norm(a) * norm(b));
}

/**
 * Overlap of branch wave functions: sum over cells of the smallest branch
 * density, times the cell volume. Zero when the branches have disjoint
 * supports.
 */
inline double branch_overlap(const std::vector<SpinorField>& branches) {
  if (branches.size() < 2) throw PreconditionError("branch_overlap needs at least two branches");
  std::vector<DensityField> rho;
  for (const auto& b : branches) {
    b.require_same(branches[0]);
    rho.push_back(density(b));
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < branches[0].cell_count(); ++c) {
    double m = rho[0].values[c];
    for (std::size_t k = 1; k < rho.size(); ++k) m = std::min(m, rho[k].values[c]);
    acc += m;
  }
  return acc * branches[0].grid().cell_volume();
}

/// Split psi into branches psi * mask_k. Masks must not share a cell.
inline std::vector<SpinorField> mask_branches(const SpinorField& psi, const std::vector<std::vector<bool>>& masks) {
  std::vector<SpinorField> out;
  std::vector<bool> used(psi.cell_count(), false);
  for (const auto& m : masks) {
    if (m.size() != psi.cell_count()) throw PreconditionError("branch mask must have one entry per cell");
    SpinorField b(psi.grid(), psi.spin_dim());
    for (std::size_t c = 0; c < psi.cell_count(); ++c) {
      if (!m[c]) continue;
      if (used[c]) throw PreconditionError("branch masks overlap");
      used[c] = true;
      for (std::size_t s = 0; s < psi.spin_dim(); ++s) b(c, s) = psi(c, s);
    }
    out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Asymptotic momentum
// ---------------------------------------------------------------------------

struct MomentumReport {
  double horizon = 0.0;
  std::vector<std::vector<double>> momenta;  ///< per member, per axis: m Q(T) / T
  std::vector<double> ks_per_axis;
  std::size_t sample_count = 0;
};

/**
 * Marginal momentum distribution of |psi_hat|^2 along one axis, as masses on
 * momentum cells [hbar (k - dk/2), hbar (k + dk/2)) in increasing order.
 */
inline void momentum_marginal(const SpinorField& psi, std::size_t axis, double hbar, std::vector<double>& edges,
                              std::vector<double>& mass) {
  const Grid& g = psi.grid();
  const auto hat = spectral_transform(psi);
  const auto rho = density(hat);
  const std::size_t n = g.axis(axis).points;
  std::vector<double> by_index(n, 0.0);
  for (std::size_t c = 0; c < g.cell_count(); ++c) by_index[g.axis_index(c, axis)] += rho.values[c];
  const double dk = 2.0 * kPi / g.axis(axis).extent;
  mass.assign(n, 0.0);
  edges.assign(n + 1, 0.0);
  // Index j carries wavenumber j - n/2 after the shift (the Nyquist cell first).
  for (std::size_t s = 0; s < n; ++s) mass[s] = by_index[(s + n / 2) % n];
  for (std::size_t s = 0; s <= n; ++s)
    edges[s] = hbar * dk * (static_cast<double>(s) - static_cast<double>(n / 2) - 0.5);
}

/**
 * Push members to time T under a free evolution and compare m Q(T) / T with
 * the momentum distribution of the initial snapshot.
 */
inline MomentumReport asymptotic_momentum(const GuidanceField& field, const Ensemble& ensemble, double horizon,
                                          double rk_dt, const NodeGuard& guard = {}, unsigned workers = 1) {
  const WaveEvolution& evo = field.evolution();
  if (!evo.free_evolution()) throw PreconditionError("asymptotic momentum requires a free evolution");
  if (!(horizon > 0.0)) throw PreconditionError("asymptotic momentum: horizon must be > 0");
  const auto pushed = push_forward(field, ensemble, evo.t_begin() + horizon, rk_dt, guard, workers);
  const auto& kin = evo.kinematics();
  const Grid& g = evo.grid();
  MomentumReport r;
  r.horizon = horizon;
  r.sample_count = pushed.size();
  for (const auto& q : pushed.members) {
    std::vector<double> p(g.rank());
    for (std::size_t a = 0; a < g.rank(); ++a) p[a] = kin.axis_mass[a] * q[a] / horizon;
    r.momenta.push_back(std::move(p));
  }
  for (std::size_t a = 0; a < g.rank(); ++a) {
    std::vector<double> edges, mass;
    momentum_marginal(evo.snapshot(0), a, kin.hbar, edges, mass);
    std::vector<double> xs;
    for (const auto& p : r.momenta) xs.push_back(p[a]);
    r.ks_per_axis.push_back(ks_distance(std::move(xs), edges, mass));
  }
  return r;
}

/// CSV with header member_id,q_1,...,q_M.
inline void write_ensemble_csv(std::ostream& os, const Ensemble& e) {
  const std::size_t m = e.members.empty() ? 0 : e.members[0].size();
  os << "member_id";
  for (std::size_t a = 0; a < m; ++a) os << ",q_" << a + 1;
  os << '\n';
  for (std::size_t i = 0; i < e.size(); ++i) {
    os << i;
    for (double x : e.members[i].coords) {
      os << ',';
      write_number(os, x);
    }
    os << '\n';
  }
}

}  // namespace pilotwave
