// Copyright 2026 The hsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Classical finite-difference reference for the scalar wave system
//
//     A' = V,   V' = K A,   K = C (sum_mu D+_mu C^2 D-_mu) C^-1,
//
// which is the second-order form of the TM Hamiltonian system under
// u_0 = V/c, u_mu = C D-_mu C^-1 A.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hsim/grid.hpp"
#include "hsim/operators.hpp"

namespace hsim {

struct WaveField {
  Eigen::VectorXd A;
  Eigen::VectorXd V;
  double t = 0.0;
  bool cfl_violation = false;
};

class WaveSolver {
 public:
  WaveSolver(const GridSpec& grid, const MaterialField& material) : grid_(grid), material_(material) {
    grid.validate();
    material.validate(grid);
    const std::size_t n = grid.num_points();
    RealSparse c2 = build_material_diag(material, grid);
    c2 = c2 * c2;
    RealSparse inner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (int axis = 0; axis < grid.dim; ++axis) {
      const DiffOperator fwd = build_diff(grid, axis, Direction::forward);
      const RealSparse dplus = embed_axis(grid, axis, fwd.matrix);
      const RealSparse dminus = embed_axis(grid, axis, adjoint_backward(fwd).matrix);
      inner += RealSparse(dplus * c2 * dminus);
      grad_.push_back(dminus);
    }
    const Eigen::VectorXd c = material.c;
    const Eigen::VectorXd inv = c.cwiseInverse();
    k_ = c.asDiagonal() * inner * inv.asDiagonal();
    k_.makeCompressed();
  }

  const RealSparse& K() const { return k_; }
  const GridSpec& grid() const { return grid_; }
  const MaterialField& material() const { return material_; }

  double cfl_limit() const { return grid_.h / (material_.max() * std::sqrt(static_cast<double>(grid_.dim))); }

  WaveField initial(const Eigen::VectorXd& a, const Eigen::VectorXd& v) const {
    if (static_cast<std::size_t>(a.size()) != grid_.num_points() || a.size() != v.size())
      throw std::invalid_argument("wave field does not match grid");
    return WaveField{a, v, 0.0, false};
  }

  // Kick-drift-kick leapfrog; second order and time reversible.
  WaveField leapfrog_step(WaveField f, double dt) const {
    f.cfl_violation = f.cfl_violation || std::abs(dt) > cfl_limit() * (1.0 + 1e-12);
    f.V += 0.5 * dt * (k_ * f.A);
    f.A += dt * f.V;
    f.V += 0.5 * dt * (k_ * f.A);
    f.t += dt;
    return f;
  }

  WaveField rk4_step(WaveField f, double dt) const {
    auto rhs_a = [](const Eigen::VectorXd& v) { return v; };
    auto rhs_v = [&](const Eigen::VectorXd& a) { return Eigen::VectorXd(k_ * a); };
    const Eigen::VectorXd a1 = rhs_a(f.V), v1 = rhs_v(f.A);
    const Eigen::VectorXd a2 = rhs_a(f.V + 0.5 * dt * v1), v2 = rhs_v(f.A + 0.5 * dt * a1);
    const Eigen::VectorXd a3 = rhs_a(f.V + 0.5 * dt * v2), v3 = rhs_v(f.A + 0.5 * dt * a2);
    const Eigen::VectorXd a4 = rhs_a(f.V + dt * v3), v4 = rhs_v(f.A + dt * a3);
    f.A += (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    f.V += (dt / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
    f.t += dt;
    return f;
  }

  // Half the squared norm of the unnormalized Hamiltonian state; conserved
  // by the semi-discrete dynamics.
  double energy(const WaveField& f) const {
    const Eigen::VectorXd inv = material_.c.cwiseInverse();
    double e = (f.V.cwiseProduct(inv)).squaredNorm();
    const Eigen::VectorXd a_over_c = f.A.cwiseProduct(inv);
    for (const auto& d : grad_) e += (material_.c.cwiseProduct(d * a_over_c)).squaredNorm();
    return 0.5 * e;
  }

  Eigen::VectorXd ez(const WaveField& f) const { return -f.V; }

  // Normalized TM state carrying this field.
  StateVector to_state(const WaveField& f) const {
    if (grid_.dim != 2) throw std::invalid_argument("TM state requires a 2D grid");
    StateVector s = StateVector::tm2d(grid_);
    const Eigen::VectorXd inv = material_.c.cwiseInverse();
    s.component(0) = f.V.cwiseProduct(inv).cast<cplx>();
    const Eigen::VectorXd a_over_c = f.A.cwiseProduct(inv);
    for (int axis = 0; axis < 2; ++axis)
      s.component(1 + axis) = material_.c.cwiseProduct(grad_[static_cast<std::size_t>(axis)] * a_over_c).cast<cplx>();
    s.normalize();
    return s;
  }

 private:
  GridSpec grid_;
  MaterialField material_;
  RealSparse k_;
  std::vector<RealSparse> grad_;
};

// ||a - b|| / ||b||, with b the reference.
inline double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("grid mismatch");
  const double ref = b.norm();
  const double diff = (a - b).norm();
  return ref == 0.0 ? diff : diff / ref;
}

// Per-snapshot relative deviation of quantum E_z against the classical one.
inline std::vector<double> compare_to_quantum(const std::vector<Eigen::VectorXd>& fdm_ez,
                                              const std::vector<Eigen::VectorXd>& quantum_ez) {
  if (fdm_ez.size() != quantum_ez.size()) throw std::invalid_argument("trajectories differ in length");
  std::vector<double> out;
  out.reserve(fdm_ez.size());
  for (std::size_t k = 0; k < fdm_ez.size(); ++k) out.push_back(relative_l2(quantum_ez[k], fdm_ez[k]));
  return out;
}

}  // namespace hsim
