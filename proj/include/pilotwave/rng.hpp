// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file rng.hpp
 * @brief Philox4x32-10 counter-based generator with labeled substreams.
 *
 * A stream is identified by (seed, label, index). The seed is the Philox key;
 * label and index occupy the upper three counter words, and the lowest word
 * counts blocks. Streams never share a counter, so member i of an ensemble
 * draws the same numbers no matter which thread evaluates it or in which
 * order members are processed.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace pilotwave {

/// 32-bit FNV-1a, used to turn stage names into stream labels.
constexpr std::uint32_t stream_label(std::string_view name) {
  std::uint32_t h = 2166136261u;
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 16777619u;
  }
  return h;
}

class CounterRng {
 public:
  static constexpr std::string_view kName = "philox4x32-10";

  CounterRng(std::uint64_t seed, std::uint32_t label, std::uint64_t index)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        counter_{0u, static_cast<std::uint32_t>(index),
                 static_cast<std::uint32_t>(index >> 32), label} {}

  std::uint32_t next_u32() {
    if (used_ == 4) refill();
    return block_[used_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe to take the logarithm of.
  double uniform_open_left() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_open_left()) / rate; }

  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  void refill() {
    block_ = philox(counter_, key_);
    ++counter_[0];
    used_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
};

}  // namespace pilotwave
