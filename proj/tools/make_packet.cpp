// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

// make_packet: write a normalized one-dimensional Gaussian packet as a
// PWFIELD file, for use as psi0 in a custom run.

#include <CLI11.hpp>

#include <iostream>

#include "pilotwave/field_io.hpp"

int main(int argc, char** argv) {
  using namespace pilotwave;
  CLI::App app{"Write a Gaussian packet as a PWFIELD file"};
  std::string out;
  double extent = 20, sigma = 1, x0 = 0, k0 = 0;
  std::size_t points = 256;
  app.add_option("out", out, "output file")->required();
  app.add_option("--extent", extent, "box length")->check(CLI::PositiveNumber);
  app.add_option("--points", points, "grid points (power of two)");
  app.add_option("--sigma", sigma, "packet width")->check(CLI::PositiveNumber);
  app.add_option("--x0", x0, "packet center");
  app.add_option("--k0", k0, "mean wavenumber");
  CLI11_PARSE(app, argc, argv);
  try {
    const Grid g = make_grid({Axis::centered(extent, points)});
    save_field(out, normalize(SpinorField::scalar(g, [&](std::span<const double> q) {
                 const double x = q[0] - x0;
                 return std::exp(-x * x / (4 * sigma * sigma)) * std::exp(Complex{0, k0 * q[0]});
               })));
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
  return 0;
}
