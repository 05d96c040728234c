// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file field_io.hpp
 * @brief Binary field snapshot files.
 *
 * Byte layout (all integers unsigned, written in the writer's byte order):
 *
 *   offset  size  content
 *   0       8     magic "PWFIELD\0"
 *   8       4     endianness tag 0x01020304
 *   12      4     format version (1)
 *   16      4     rank (number of axes, 1..3)
 *   20      4     spin_dim
 *   24      24*r  per axis: f64 extent, f64 origin, u32 points, u32 periodic flag
 *   ...           cells * spin_dim complex64 values, each an f32 real part
 *                 followed by an f32 imaginary part; cells in row-major order
 *                 (last axis fastest), spin component innermost.
 *
 * A reader that sees the tag as 0x04030201 byte-swaps every header field and
 * payload word. Payload precision is single, so a round trip through a file
 * is exact only to about 1e-7 relative.
 */

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "pilotwave/lattice.hpp"

namespace pilotwave {

namespace detail {

inline constexpr std::array<char, 8> kFieldMagic{'P', 'W', 'F', 'I', 'E', 'L', 'D', '\0'};
inline constexpr std::uint32_t kEndianTag = 0x01020304u;

template <class T>
void write_raw(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_raw(std::istream& is, bool swap) {
  std::array<char, sizeof(T)> buf;
  if (!is.read(buf.data(), sizeof(T))) throw Error("field file truncated");
  if (swap) std::reverse(buf.begin(), buf.end());
  T value;
  std::memcpy(&value, buf.data(), sizeof(T));
  return value;
}

}  // namespace detail

inline void write_field(std::ostream& os, const SpinorField& psi) {
  using namespace detail;
  os.write(kFieldMagic.data(), kFieldMagic.size());
  write_raw<std::uint32_t>(os, kEndianTag);
  write_raw<std::uint32_t>(os, 1);
  write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(psi.grid().rank()));
  write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(psi.spin_dim()));
  for (const Axis& ax : psi.grid().axes()) {
    write_raw<double>(os, ax.extent);
    write_raw<double>(os, ax.origin);
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(ax.points));
    write_raw<std::uint32_t>(os, ax.periodic ? 1u : 0u);
  }
  for (const Complex& z : psi.amplitudes()) {
    write_raw<float>(os, static_cast<float>(z.real()));
    write_raw<float>(os, static_cast<float>(z.imag()));
  }
  if (!os) throw Error("failed writing field data");
}

inline SpinorField read_field(std::istream& is) {
  using namespace detail;
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kFieldMagic) throw Error("not a field snapshot file");
  std::uint32_t tag = read_raw<std::uint32_t>(is, false);
  bool swap = false;
  if (tag != kEndianTag) {
    if (tag != 0x04030201u) throw Error("field file has an unknown endianness tag");
    swap = true;
  }
  const auto version = read_raw<std::uint32_t>(is, swap);
  if (version != 1) throw Error("unsupported field file version " + std::to_string(version));
  const auto rank = read_raw<std::uint32_t>(is, swap);
  const auto spin_dim = read_raw<std::uint32_t>(is, swap);
  if (rank == 0 || rank > kMaxAxes || spin_dim == 0) throw Error("corrupt field file header");
  std::vector<Axis> axes;
  for (std::uint32_t a = 0; a < rank; ++a) {
    Axis ax;
    ax.extent = read_raw<double>(is, swap);
    ax.origin = read_raw<double>(is, swap);
    ax.points = read_raw<std::uint32_t>(is, swap);
    ax.periodic = read_raw<std::uint32_t>(is, swap) != 0;
    axes.push_back(ax);
  }
  Grid grid(std::move(axes));
  std::vector<Complex> amps(grid.cell_count() * spin_dim);
  for (auto& z : amps) {
    const float re = read_raw<float>(is, swap);
    const float im = read_raw<float>(is, swap);
    z = {re, im};
  }
  return SpinorField(std::move(grid), spin_dim, std::move(amps));
}

inline void save_field(const std::string& path, const SpinorField& psi) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_field(os, psi);
}

inline SpinorField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_field(is);
}

}  // namespace pilotwave
