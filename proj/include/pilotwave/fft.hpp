// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file fft.hpp
 * @brief Thread-safe cache of in-place FFTW plans over interleaved spinor data.
 *
 * Plans are built once per (shape, spin_dim, axis mask, direction) with
 * FFTW_ESTIMATE so the chosen algorithm, and therefore every output bit, is
 * the same on every run. Planning is serialized; execution through the
 * new-array interface is safe from any thread.
 */

#pragma once

#include <fftw3.h>

#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "pilotwave/core.hpp"

namespace pilotwave::detail {

class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

  /// Plan for an in-place transform over the axes set in `axis_mask`.
  fftw_plan plan(const std::vector<std::size_t>& shape, std::size_t spin_dim,
                 unsigned axis_mask, int sign) {
    Key key{shape, spin_dim, axis_mask, sign};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<fftw_iodim> dims, loops;
    std::size_t stride = spin_dim;
    std::vector<std::ptrdiff_t> strides(shape.size());
    for (std::size_t a = shape.size(); a-- > 0;) {
      strides[a] = static_cast<std::ptrdiff_t>(stride);
      stride *= shape[a];
    }
    for (std::size_t a = 0; a < shape.size(); ++a) {
      fftw_iodim d{static_cast<int>(shape[a]), static_cast<int>(strides[a]),
                   static_cast<int>(strides[a])};
      ((axis_mask >> a) & 1u ? dims : loops).push_back(d);
    }
    if (spin_dim > 1) loops.push_back({static_cast<int>(spin_dim), 1, 1});

    std::vector<fftw_complex> scratch(stride);
    fftw_plan p = fftw_plan_guru_dft(static_cast<int>(dims.size()), dims.data(),
                                     static_cast<int>(loops.size()), loops.data(),
                                     scratch.data(), scratch.data(), sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw Error("FFTW failed to create a plan");
    plans_.emplace(std::move(key), p);
    return p;
  }

  ~FftPlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  FftPlanCache() = default;

  using Key = std::tuple<std::vector<std::size_t>, std::size_t, unsigned, int>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

/// Unnormalized in-place DFT; sign is FFTW_FORWARD or FFTW_BACKWARD.
inline void fft_inplace(std::span<Complex> data, const std::vector<std::size_t>& shape,
                        std::size_t spin_dim, unsigned axis_mask, int sign) {
  fftw_plan p = FftPlanCache::instance().plan(shape, spin_dim, axis_mask, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
}

}  // namespace pilotwave::detail
