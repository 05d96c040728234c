// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

// JSON definition files for finite sector spaces.
//
//   {"hbar": 1.0,
//    "sectors": [{"label": "0", "configs": ["empty"]}, ...],
//    "hamiltonian": [[re, im], [re, im], ...]}   // row-major, dim * dim pairs

#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "pilotwave/jumps.hpp"

namespace pilotwave {

inline SectorSpace sector_space_from_json(const nlohmann::json& j) {
  try {
    std::vector<Sector> sectors;
    for (const auto& s : j.at("sectors"))
      sectors.push_back({s.at("label").get<std::string>(), s.at("configs").get<std::vector<std::string>>()});
    std::size_t dim = 0;
    for (const auto& s : sectors) dim += s.configs.size();
    const auto& h = j.at("hamiltonian");
    if (!h.is_array() || h.size() != dim * dim)
      throw ConfigError("hamiltonian must list " + std::to_string(dim * dim) + " complex entries");
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim * dim; ++k) {
      const auto& e = h[k];
      if (!e.is_array() || e.size() != 2) throw ConfigError("hamiltonian entries must be [re, im] pairs");
      m(static_cast<Eigen::Index>(k / dim), static_cast<Eigen::Index>(k % dim)) =
          Complex{e[0].get<double>(), e[1].get<double>()};
    }
    return SectorSpace(std::move(sectors), std::move(m), j.value("hbar", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sector space file: ") + e.what());
  }
}

inline SectorSpace load_sector_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sector space file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("sector space file '" + path + "': " + e.what());
  }
  return sector_space_from_json(j);
}

inline nlohmann::json sector_space_to_json(const SectorSpace& space) {
  nlohmann::json j;
  j["hbar"] = space.hbar();
  for (const auto& s : space.sectors()) j["sectors"].push_back({{"label", s.label}, {"configs", s.configs}});
  const auto& h = space.hamiltonian();
  j["hamiltonian"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c) j["hamiltonian"].push_back({h(r, c).real(), h(r, c).imag()});
  return j;
}

}  // namespace pilotwave
