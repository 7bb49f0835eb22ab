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

// Shift and difference operators on axis registers, and assembly of the
// block Hamiltonians for the 2D TM system and the full 3D potential system.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hsim/grid.hpp"

namespace hsim {

using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using ComplexSparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

enum class Shift { minus, plus };
enum class Direction { forward, backward };

namespace detail {

inline void require_axis(const GridSpec& grid, int axis) {
  if (!grid.active(axis)) throw std::invalid_argument("axis is not active in this grid");
}

inline RealSparse from_triplets(std::size_t rows, std::size_t cols, const std::vector<Eigen::Triplet<double>>& t) {
  RealSparse m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

inline RealSparse outer(std::size_t n, std::size_t row, std::size_t col, double value) {
  return from_triplets(n, n, {{static_cast<int>(row), static_cast<int>(col), value}});
}

inline RealSparse identity(std::size_t n) {
  RealSparse m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setIdentity();
  return m;
}

}  // namespace detail

// Axis-local shift on N = 2^{n_axis} points: S-[j, j+1] = 1, S+ = (S-)^T.
// No wrap-around; periodic wrap is a boundary correction of the difference
// operator.
inline RealSparse build_shift(const GridSpec& grid, int axis, Shift kind) {
  detail::require_axis(grid, axis);
  const std::size_t n = grid.extent(axis);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (kind == Shift::minus)
      t.emplace_back(static_cast<int>(j), static_cast<int>(j + 1), 1.0);
    else
      t.emplace_back(static_cast<int>(j + 1), static_cast<int>(j), 1.0);
  }
  return detail::from_triplets(n, n, t);
}

struct DiffOperator {
  int axis = 0;
  Direction direction = Direction::forward;
  Boundary bc = Boundary::dirichlet;
  double h = 1.0;
  RealSparse matrix;  // axis-local N x N
};

// Forward:  D+ = (S- - I + B)/h, with B = 0 (Dirichlet, ghost value zero),
//           |N-1><N-1| (Neumann) or |N-1><0| (periodic).
// Backward: D- = (I - S+ - B')/h, with B' = 0, |0><0| or |0><N-1|.
inline DiffOperator build_diff(const GridSpec& grid, int axis, Direction direction, Boundary bc) {
  detail::require_axis(grid, axis);
  const std::size_t n = grid.extent(axis);
  const RealSparse id = detail::identity(n);
  RealSparse m;
  if (direction == Direction::forward) {
    m = build_shift(grid, axis, Shift::minus) - id;
    if (bc == Boundary::neumann) m += detail::outer(n, n - 1, n - 1, 1.0);
    if (bc == Boundary::periodic) m += detail::outer(n, n - 1, 0, 1.0);
  } else {
    m = id - build_shift(grid, axis, Shift::plus);
    if (bc == Boundary::neumann) m -= detail::outer(n, 0, 0, 1.0);
    if (bc == Boundary::periodic) m -= detail::outer(n, 0, n - 1, 1.0);
  }
  m *= 1.0 / grid.h;
  m.prune(0.0);
  m.makeCompressed();
  return DiffOperator{axis, direction, bc, grid.h, std::move(m)};
}

inline DiffOperator build_diff(const GridSpec& grid, int axis, Direction direction) {
  detail::require_axis(grid, axis);
  return build_diff(grid, axis, direction, grid.bc[axis]);
}

// D- := -(D+)^T. Coincides with the literal backward stencil for Dirichlet
// and periodic boundaries; for Neumann it is the adjoint-consistent variant.
inline DiffOperator adjoint_backward(const DiffOperator& forward) {
  if (forward.direction != Direction::forward)
    throw std::invalid_argument("adjoint_backward expects a forward operator");
  RealSparse m = -RealSparse(forward.matrix.transpose());
  m.makeCompressed();
  return DiffOperator{forward.axis, Direction::backward, forward.bc, forward.h, std::move(m)};
}

// Lifts an axis-local operator to the full spatial register (identity on
// every other axis).
inline RealSparse embed_axis(const GridSpec& grid, int axis, const RealSparse& local) {
  detail::require_axis(grid, axis);
  const std::size_t n = grid.extent(axis);
  if (static_cast<std::size_t>(local.rows()) != n || static_cast<std::size_t>(local.cols()) != n)
    throw std::invalid_argument("operator size does not match axis extent");
  const std::size_t stride = grid.stride(axis);
  const std::size_t total = grid.num_points();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(local.nonZeros()) * (total / n));
  for (std::size_t s = 0; s < total; ++s) {
    const std::size_t j = (s / stride) % n;
    const std::size_t base = s - j * stride;
    for (RealSparse::InnerIterator it(local, static_cast<Eigen::Index>(j)); it; ++it)
      t.emplace_back(static_cast<int>(s), static_cast<int>(base + static_cast<std::size_t>(it.col()) * stride),
                     it.value());
  }
  return detail::from_triplets(total, total, t);
}

inline RealSparse build_material_diag(const MaterialField& material, const GridSpec& grid) {
  material.validate(grid);
  const std::size_t n = grid.num_points();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(n);
  for (std::size_t s = 0; s < n; ++s)
    t.emplace_back(static_cast<int>(s), static_cast<int>(s), material.c[static_cast<Eigen::Index>(s)]);
  RealSparse m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// ---------------------------------------------------------------------------
// Hamiltonian assembly
// ---------------------------------------------------------------------------

enum class SystemKind { tm2d, full3d };

// One Hermitian coupling: i * U placed at block (field, gradient) plus its
// adjoint at (gradient, field).
struct HamiltonianTerm {
  int axis = 0;      // derivative axis
  int field = 0;     // time-derivative component r
  int gradient = 0;  // gradient component coupled to r along `axis`
  ComplexSparse matrix;
};

struct HamiltonianOperator {
  SystemKind kind = SystemKind::tm2d;
  GridSpec grid;
  MaterialField material;
  int components = 3;
  int index_qubits = 2;
  std::vector<HamiltonianTerm> terms;
  ComplexSparse total;

  std::size_t dimension() const { return (std::size_t{1} << index_qubits) * grid.num_points(); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return total * v; }

  StateVector empty_state() const { return StateVector::zero(grid, components, index_qubits); }
};

namespace detail {

// Appends i*upper at block (r, g) and its adjoint at block (g, r).
inline void add_coupling(std::vector<Eigen::Triplet<cplx>>& t, std::size_t n, int r, int g,
                         const RealSparse& upper, const RealSparse& lower) {
  const cplx i(0.0, 1.0);
  for (Eigen::Index row = 0; row < upper.outerSize(); ++row)
    for (RealSparse::InnerIterator it(upper, row); it; ++it)
      t.emplace_back(static_cast<int>(static_cast<std::size_t>(r) * n + static_cast<std::size_t>(it.row())),
                     static_cast<int>(static_cast<std::size_t>(g) * n + static_cast<std::size_t>(it.col())),
                     i * it.value());
  for (Eigen::Index row = 0; row < lower.outerSize(); ++row)
    for (RealSparse::InnerIterator it(lower, row); it; ++it)
      t.emplace_back(static_cast<int>(static_cast<std::size_t>(g) * n + static_cast<std::size_t>(it.row())),
                     static_cast<int>(static_cast<std::size_t>(r) * n + static_cast<std::size_t>(it.col())),
                     i * it.value());
}

inline ComplexSparse complex_from_triplets(std::size_t dim, const std::vector<Eigen::Triplet<cplx>>& t) {
  ComplexSparse m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(t.begin(), t.end());
  m.prune(cplx(0.0, 0.0));
  m.makeCompressed();
  return m;
}

inline void finish_total(HamiltonianOperator& op) {
  ComplexSparse total(static_cast<Eigen::Index>(op.dimension()), static_cast<Eigen::Index>(op.dimension()));
  for (const auto& term : op.terms) total += term.matrix;
  total.makeCompressed();
  op.total = std::move(total);
}

}  // namespace detail

// 2D TM system on (E_z/c, d_x A_z, d_y A_z):
//   H = i [[0, D+_x c, D+_y c], [c D-_x, 0, 0], [c D-_y, 0, 0]]
// with D- = -(D+)^T per axis, carried in a four-component register.
inline HamiltonianOperator assemble_tm2d(const GridSpec& grid, const MaterialField& material) {
  grid.validate();
  if (grid.dim != 2) throw std::invalid_argument("assemble_tm2d requires a 2D grid");
  material.validate(grid);
  HamiltonianOperator op;
  op.kind = SystemKind::tm2d;
  op.grid = grid;
  op.material = material;
  op.components = 3;
  op.index_qubits = 2;
  const RealSparse c = build_material_diag(material, grid);
  const std::size_t n = grid.num_points();
  for (int axis = 0; axis < 2; ++axis) {
    const DiffOperator fwd = build_diff(grid, axis, Direction::forward);
    const DiffOperator bwd = adjoint_backward(fwd);
    const RealSparse dplus = embed_axis(grid, axis, fwd.matrix);
    const RealSparse dminus = embed_axis(grid, axis, bwd.matrix);
    const RealSparse upper = dplus * c;
    const RealSparse lower = c * dminus;
    std::vector<Eigen::Triplet<cplx>> t;
    detail::add_coupling(t, n, 0, 1 + axis, upper, lower);
    op.terms.push_back(HamiltonianTerm{axis, 0, 1 + axis, detail::complex_from_triplets(op.dimension(), t)});
  }
  detail::finish_total(op);
  return op;
}

// Gradient component holding d_axis A_field in the 12-component layout.
constexpr int gradient_component(int field, int axis) { return 3 + 3 * field + axis; }

// Full 3D system on (dA/dt / c, grad A): blocks (r, 3+3r+mu) = i c D+_mu and
// (3+3r+mu, r) = i D-_mu c, padded to sixteen components. Terms are ordered
// axis-major, then by field component.
inline HamiltonianOperator assemble_full3d(const GridSpec& grid, const MaterialField& material) {
  grid.validate();
  if (grid.dim != 3) throw std::invalid_argument("assemble_full3d requires a 3D grid");
  material.validate(grid);
  HamiltonianOperator op;
  op.kind = SystemKind::full3d;
  op.grid = grid;
  op.material = material;
  op.components = 12;
  op.index_qubits = 4;
  const RealSparse c = build_material_diag(material, grid);
  const std::size_t n = grid.num_points();
  for (int axis = 0; axis < 3; ++axis) {
    const DiffOperator fwd = build_diff(grid, axis, Direction::forward);
    const DiffOperator bwd = adjoint_backward(fwd);
    const RealSparse upper = c * embed_axis(grid, axis, fwd.matrix);
    const RealSparse lower = embed_axis(grid, axis, bwd.matrix) * c;
    for (int r = 0; r < 3; ++r) {
      std::vector<Eigen::Triplet<cplx>> t;
      const int g = gradient_component(r, axis);
      detail::add_coupling(t, n, r, g, upper, lower);
      op.terms.push_back(HamiltonianTerm{axis, r, g, detail::complex_from_triplets(op.dimension(), t)});
    }
  }
  detail::finish_total(op);
  return op;
}

// max |H - H^dagger| over all entries.
inline double hermiticity_defect(const ComplexSparse& h) {
  const ComplexSparse diff = h - ComplexSparse(h.adjoint());
  double worst = 0.0;
  for (Eigen::Index row = 0; row < diff.outerSize(); ++row)
    for (ComplexSparse::InnerIterator it(diff, row); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

// Coordinate list, one "row col re im" line per stored entry.
inline void write_coordinate_list(std::ostream& os, const ComplexSparse& m) {
  const auto old_precision = os.precision(17);
  for (Eigen::Index row = 0; row < m.outerSize(); ++row)
    for (ComplexSparse::InnerIterator it(m, row); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
  os.precision(old_precision);
}

// |div B| per grid point for a full 3D state, with B = curl A read directly
// from the gradient components. The gradients hold D-_mu A, so the
// divergence uses D- on every axis as well; mixed differences then cancel
// exactly. Works on normalized amplitudes.
inline Eigen::VectorXd discrete_div_of_B(const StateVector& state) {
  if (state.components != 12 || state.grid.dim != 3)
    throw std::invalid_argument("discrete_div_of_B requires a full 3D state");
  const GridSpec& grid = state.grid;
  auto u = [&](int field, int axis) -> Eigen::VectorXcd {
    return state.component(gradient_component(field, axis));
  };
  const Eigen::VectorXcd bx = u(2, 1) - u(1, 2);
  const Eigen::VectorXcd by = u(0, 2) - u(2, 0);
  const Eigen::VectorXcd bz = u(1, 0) - u(0, 1);
  const std::array<const Eigen::VectorXcd*, 3> b{&bx, &by, &bz};
  Eigen::VectorXcd div = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.num_points()));
  for (int axis = 0; axis < 3; ++axis) {
    const RealSparse d =
        embed_axis(grid, axis, adjoint_backward(build_diff(grid, axis, Direction::forward)).matrix);
    div += d.cast<cplx>() * (*b[static_cast<std::size_t>(axis)]);
  }
  return div.cwiseAbs();
}

// Builds a consistent full 3D state from potentials: components r carry
// Adot_r / c, components 3+3r+mu carry D-_mu A_r. Normalized, with the
// normalization recorded.
inline StateVector full3d_state_from_potential(const GridSpec& grid, const MaterialField& material,
                                               const std::array<Eigen::VectorXd, 3>& a,
                                               const std::array<Eigen::VectorXd, 3>& a_dot) {
  if (grid.dim != 3) throw std::invalid_argument("full 3D state requires a 3D grid");
  material.validate(grid);
  StateVector s = StateVector::full3d(grid);
  for (int r = 0; r < 3; ++r) {
    s.component(r) = a_dot[static_cast<std::size_t>(r)].cwiseQuotient(material.c).cast<cplx>();
    for (int axis = 0; axis < 3; ++axis) {
      const RealSparse dminus =
          embed_axis(grid, axis, adjoint_backward(build_diff(grid, axis, Direction::forward)).matrix);
      s.component(gradient_component(r, axis)) = (dminus * a[static_cast<std::size_t>(r)]).cast<cplx>();
    }
  }
  s.normalize();
  return s;
}

}  // namespace hsim
