// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

// Outcome statistics of experiments on a small basis (spin space or a space
// of wave-function branches). Each outcome z has a positive operator F(z);
// the operators sum to the identity and P(z) = <psi|F(z)|psi>.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pilotwave/core.hpp"

namespace pilotwave {

struct PovmTable {
  std::string name;
  std::vector<double> outcomes;
  std::vector<Eigen::MatrixXcd> effects;

  std::size_t dimension() const { return effects.empty() ? 0 : static_cast<std::size_t>(effects[0].rows()); }

  std::size_t index_of(double z) const {
    for (std::size_t k = 0; k < outcomes.size(); ++k)
      if (outcomes[k] == z) return k;
    throw PreconditionError("povm '" + name + "': unknown outcome " + std::to_string(z));
  }

  /// Throws unless every F(z) is Hermitian and positive and they sum to one.
  void validate(double tol = 1e-12) const {
    if (outcomes.empty() || outcomes.size() != effects.size())
      throw PreconditionError("povm '" + name + "': one effect per outcome required");
    const auto d = effects[0].rows();
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& f : effects) {
      if (f.rows() != d || f.cols() != d) throw PreconditionError("povm '" + name + "': effects differ in size");
      if ((f - f.adjoint()).cwiseAbs().maxCoeff() > tol) throw PreconditionError("povm '" + name + "': effect not Hermitian");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f);
      if (es.eigenvalues().minCoeff() < -tol) throw PreconditionError("povm '" + name + "': effect not positive");
      sum += f;
    }
    if ((sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() > tol)
      throw PreconditionError("povm '" + name + "': effects do not sum to the identity");
  }
};

inline double povm_probability(const Eigen::VectorXcd& psi, const PovmTable& table, double z) {
  const std::size_t k = table.index_of(z);
  if (psi.size() != static_cast<Eigen::Index>(table.dimension()))
    throw PreconditionError("povm_probability: state has the wrong dimension");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw PreconditionError("povm_probability: state is not normalized");
  return std::clamp(psi.dot(table.effects[k] * psi).real(), 0.0, 1.0);
}

inline std::vector<double> povm_distribution(const Eigen::VectorXcd& psi, const PovmTable& table) {
  std::vector<double> out;
  for (double z : table.outcomes) out.push_back(povm_probability(psi, table, z));
  return out;
}

/// A = sum_z z F(z) for a projection-valued table.
inline Eigen::MatrixXcd observable_from_povm(const PovmTable& table, double tol = 1e-12) {
  table.validate(tol);
  const auto d = static_cast<Eigen::Index>(table.dimension());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t k = 0; k < table.effects.size(); ++k) {
    const auto& f = table.effects[k];
    if ((f * f - f).cwiseAbs().maxCoeff() > tol)
      throw PreconditionError("observable_from_povm: effect for outcome " + std::to_string(table.outcomes[k]) +
                              " is not a projection");
    for (std::size_t j = 0; j < k; ++j)
      if ((f * table.effects[j]).cwiseAbs().maxCoeff() > tol)
        throw PreconditionError("observable_from_povm: effects are not mutually orthogonal");
    a += table.outcomes[k] * f;
  }
  return a;
}

inline Eigen::MatrixXcd projector(const Eigen::VectorXcd& v) {
  const Eigen::VectorXcd u = v.normalized();
  return u * u.adjoint();
}

/// Spin along z: outcome +1 for up, -1 for down.
inline PovmTable spin_z_table() {
  return {"spin_z", {1.0, -1.0}, {projector(Eigen::Vector2cd(1, 0)), projector(Eigen::Vector2cd(0, 1))}};
}

inline PovmTable spin_x_table() {
  return {"spin_x", {1.0, -1.0}, {projector(Eigen::Vector2cd(1, 1)), projector(Eigen::Vector2cd(1, -1))}};
}

/// Coarse position on two branches: outcome x1 on branch 1, x2 on branch 2.
inline PovmTable coarse_position_table(double x1, double x2) {
  return {"coarse_position", {x1, x2}, {projector(Eigen::Vector2cd(1, 0)), projector(Eigen::Vector2cd(0, 1))}};
}

/// Unsharp spin-z reading that reports the wrong sign with probability eps.
inline PovmTable unsharp_spin_z_table(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw PreconditionError("unsharp_spin_z_table: eps must be in [0, 1]");
  Eigen::Matrix2cd up = Eigen::Matrix2cd::Zero(), down = Eigen::Matrix2cd::Zero();
  up(0, 0) = 1.0 - eps;
  up(1, 1) = eps;
  down(0, 0) = eps;
  down(1, 1) = 1.0 - eps;
  return {"unsharp_spin_z", {1.0, -1.0}, {up, down}};
}

/// Three outcomes with effects (2/3)|n_k><n_k| for real unit vectors 120 degrees apart.
inline PovmTable trine_table() {
  PovmTable t{"trine", {0.0, 1.0, 2.0}, {}};
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::acos(-1.0) * k / 3.0;
    t.effects.push_back((2.0 / 3.0) * projector(Eigen::Vector2cd(std::cos(a), std::sin(a))));
  }
  return t;
}

inline std::vector<PovmTable> builtin_povm_tables() {
  return {spin_z_table(), spin_x_table(), coarse_position_table(-1.0, 1.0), unsharp_spin_z_table(0.1), trine_table()};
}

}  // namespace pilotwave
