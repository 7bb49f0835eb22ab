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

// Time evolution: first-order Trotter product, exact exponential (block
// eigendecomposition or Lanczos), and classical RK4 on the Schroedinger form.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "hsim/error.hpp"
#include "hsim/grid.hpp"
#include "hsim/operators.hpp"

namespace hsim {

enum class Method { trotter1, exact, rk4 };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::trotter1:
      return "trotter1";
    case Method::exact:
      return "exact";
    case Method::rk4:
      return "rk4";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "trotter1") return Method::trotter1;
  if (s == "exact") return Method::exact;
  if (s == "rk4") return Method::rk4;
  throw ConfigError("unknown evolution method '" + std::string(s) + "'");
}

using TermGrouping = std::vector<std::vector<std::size_t>>;

// One group per derivative axis, in axis order.
inline TermGrouping axis_grouping(const HamiltonianOperator& h) {
  TermGrouping g(static_cast<std::size_t>(h.grid.dim));
  for (std::size_t k = 0; k < h.terms.size(); ++k) g[static_cast<std::size_t>(h.terms[k].axis)].push_back(k);
  std::erase_if(g, [](const auto& v) { return v.empty(); });
  return g;
}

// One group per time-derivative component. Every factor then adds a pure
// D- gradient to the gradient block of one potential component, so the
// discrete curl of a gradient state stays divergence free.
inline TermGrouping field_grouping(const HamiltonianOperator& h) {
  std::map<int, std::vector<std::size_t>> by_field;
  for (std::size_t k = 0; k < h.terms.size(); ++k) by_field[h.terms[k].field].push_back(k);
  TermGrouping g;
  for (auto& [field, terms] : by_field) g.push_back(std::move(terms));
  return g;
}

// Axis split for the TM system, field split for the full 3D system.
inline TermGrouping default_grouping(const HamiltonianOperator& h) {
  return h.kind == SystemKind::full3d ? field_grouping(h) : axis_grouping(h);
}

inline TermGrouping single_group(const HamiltonianOperator& h) {
  std::vector<std::size_t> all(h.terms.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return {all};
}

struct EvolutionPlan {
  Method method = Method::trotter1;
  double dt = 0.01;
  std::size_t n_steps = 1;
  TermGrouping groups;
  std::size_t snapshot_stride = 1;

  void validate(const HamiltonianOperator& h) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    if (n_steps < 1) throw ConfigError("at least one step is required");
    if (snapshot_stride < 1) throw ConfigError("snapshot stride must be at least 1");
    if (method != Method::trotter1) return;
    std::vector<int> seen(h.terms.size(), 0);
    for (const auto& g : groups)
      for (std::size_t k : g) {
        if (k >= h.terms.size()) throw ConfigError("term grouping refers to a missing term");
        ++seen[k];
      }
    for (int s : seen)
      if (s != 1) throw ConfigError("term grouping must partition the term list");
  }
};

inline EvolutionPlan make_plan(const HamiltonianOperator& h, Method method, double dt, double t_final,
                               std::size_t stride = 1) {
  EvolutionPlan p;
  p.method = method;
  p.dt = dt;
  p.n_steps = static_cast<std::size_t>(std::llround(t_final / dt));
  p.groups = default_grouping(h);
  p.snapshot_stride = stride;
  p.validate(h);
  return p;
}

inline ComplexSparse group_matrix(const HamiltonianOperator& h, const std::vector<std::size_t>& group) {
  ComplexSparse m(static_cast<Eigen::Index>(h.dimension()), static_cast<Eigen::Index>(h.dimension()));
  for (std::size_t k : group) m += h.terms[k].matrix;
  m.makeCompressed();
  return m;
}

namespace detail {

// Connected components of the sparsity graph of a square matrix. Isolated
// indices with a zero diagonal are dropped (the exponential is the identity
// there).
inline std::vector<std::vector<Eigen::Index>> coupled_components(const ComplexSparse& m) {
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  std::vector<char> touched(static_cast<std::size_t>(n), 0);
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (ComplexSparse::InnerIterator it(m, r); it; ++it) {
      if (it.value() == cplx(0.0, 0.0)) continue;
      touched[static_cast<std::size_t>(it.row())] = touched[static_cast<std::size_t>(it.col())] = 1;
      const Eigen::Index a = find(it.row()), b = find(it.col());
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!touched[static_cast<std::size_t>(i)]) continue;
    const Eigen::Index root = find(i);
    if (slot[static_cast<std::size_t>(root)] < 0) {
      slot[static_cast<std::size_t>(root)] = static_cast<Eigen::Index>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(i);
  }
  return groups;
}

inline Eigen::MatrixXcd dense_block(const ComplexSparse& m, const std::vector<Eigen::Index>& idx) {
  std::vector<Eigen::Index> local(static_cast<std::size_t>(m.rows()), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) local[static_cast<std::size_t>(idx[k])] = static_cast<Eigen::Index>(k);
  const auto size = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(size, size);
  for (std::size_t k = 0; k < idx.size(); ++k)
    for (ComplexSparse::InnerIterator it(m, idx[k]); it; ++it)
      d(static_cast<Eigen::Index>(k), local[static_cast<std::size_t>(it.col())]) = it.value();
  return d;
}

inline bool purely_imaginary(const Eigen::MatrixXcd& d) { return d.real().cwiseAbs().maxCoeff() == 0.0; }

}  // namespace detail

// exp(-i H t) v by restarted Lanczos with adaptive sub-steps.
inline Eigen::VectorXcd krylov_expm(const ComplexSparse& h, const Eigen::VectorXcd& v, double t,
                                    int max_dim = 30, double tol = 1e-13) {
  Eigen::VectorXcd w = v;
  double remaining = t;
  const double v_norm = v.norm();
  if (v_norm == 0.0 || t == 0.0) return w;
  double tau = t;
  while (std::abs(remaining) > 0.0) {
    const double beta0 = w.norm();
    std::vector<Eigen::VectorXcd> basis{w / beta0};
    std::vector<double> alpha, beta;
    bool happy = false;
    for (int j = 0; j < max_dim; ++j) {
      Eigen::VectorXcd q = h * basis.back();
      alpha.push_back(basis.back().dot(q).real());
      for (const auto& b : basis) q -= b * b.dot(q);
      for (const auto& b : basis) q -= b * b.dot(q);
      const double bn = q.norm();
      if (bn < 1e-14 * (std::abs(alpha.back()) + 1.0)) {
        happy = true;
        break;
      }
      beta.push_back(bn);
      basis.push_back(q / bn);
    }
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    auto propagate = [&](double s) {
      Eigen::VectorXcd phase(m);
      for (Eigen::Index i = 0; i < m; ++i) phase[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * s));
      const Eigen::VectorXcd c = es.eigenvectors().transpose().col(0).cast<cplx>();
      return Eigen::VectorXcd(es.eigenvectors().cast<cplx>() * phase.cwiseProduct(c));
    };
    tau = std::copysign(std::min(std::abs(tau) * 2.0, std::abs(remaining)), remaining);
    Eigen::VectorXcd y;
    while (true) {
      y = propagate(tau);
      const double err = happy ? 0.0 : beta.back() * std::abs(y[m - 1]);
      if (err <= tol || std::abs(tau) < 1e-12 * std::abs(t)) break;
      tau *= 0.5;
    }
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(w.size());
    for (Eigen::Index i = 0; i < m; ++i) next += basis[static_cast<std::size_t>(i)] * y[i];
    w = beta0 * next;
    remaining -= tau;
    if (std::abs(remaining) < 1e-15 * std::abs(t)) break;
  }
  return w;
}

// exp(-i H dt) for a fixed dt, applied block by block over the connected
// components of H. Purely imaginary blocks give real orthogonal factors and
// are stored as real matrices.
class BlockExponential {
 public:
  static constexpr std::size_t kDenseLimit = 2048;

  BlockExponential(const ComplexSparse& h, double dt) : dt_(dt) {
    const auto comps = detail::coupled_components(h);
    for (const auto& idx : comps) {
      if (idx.size() > kDenseLimit) {
        krylov_ = true;
        matrix_ = h;
        blocks_.clear();
        return;
      }
    }
    for (const auto& idx : comps) {
      const Eigen::MatrixXcd d = detail::dense_block(h, idx);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d);
      Eigen::VectorXcd phase(d.rows());
      for (Eigen::Index i = 0; i < d.rows(); ++i) phase[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * dt));
      const Eigen::MatrixXcd u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
      Block b;
      b.idx = idx;
      b.is_real = detail::purely_imaginary(d);
      if (b.is_real)
        b.real = u.real();
      else
        b.complex = u;
      blocks_.push_back(std::move(b));
    }
  }

  double dt() const { return dt_; }
  bool uses_krylov() const { return krylov_; }
  std::size_t block_count() const { return blocks_.size(); }

  void apply(Eigen::VectorXcd& v) const {
    if (krylov_) {
      v = krylov_expm(matrix_, v, dt_);
      return;
    }
    for (const auto& b : blocks_) {
      const auto m = static_cast<Eigen::Index>(b.idx.size());
      if (b.is_real) {
        Eigen::MatrixXd x(m, 2);
        for (Eigen::Index k = 0; k < m; ++k) {
          const cplx z = v[b.idx[static_cast<std::size_t>(k)]];
          x(k, 0) = z.real();
          x(k, 1) = z.imag();
        }
        const Eigen::MatrixXd y = b.real * x;
        for (Eigen::Index k = 0; k < m; ++k) v[b.idx[static_cast<std::size_t>(k)]] = cplx(y(k, 0), y(k, 1));
      } else {
        Eigen::VectorXcd x(m);
        for (Eigen::Index k = 0; k < m; ++k) x[k] = v[b.idx[static_cast<std::size_t>(k)]];
        const Eigen::VectorXcd y = b.complex * x;
        for (Eigen::Index k = 0; k < m; ++k) v[b.idx[static_cast<std::size_t>(k)]] = y[k];
      }
    }
  }

 private:
  struct Block {
    std::vector<Eigen::Index> idx;
    bool is_real = false;
    Eigen::MatrixXd real;
    Eigen::MatrixXcd complex;
  };
  double dt_;
  bool krylov_ = false;
  ComplexSparse matrix_;
  std::vector<Block> blocks_;
};

// Product of group exponentials in declared group order (first group acts
// first).
class TrotterStepper {
 public:
  TrotterStepper(const HamiltonianOperator& h, const TermGrouping& groups, double dt) {
    for (const auto& g : groups) {
      const ComplexSparse m = group_matrix(h, g);
      double scale = 1.0;
      for (Eigen::Index k = 0; k < m.nonZeros(); ++k) scale = std::max(scale, std::abs(m.valuePtr()[k]));
      if (hermiticity_defect(m) > 1e-12 * scale) throw NumericalGuardError("non-Hermitian term group");
      factors_.emplace_back(m, dt);
    }
  }

  void step(Eigen::VectorXcd& v) const {
    for (const auto& f : factors_) f.apply(v);
  }

  void step(StateVector& s) const { step(s.amplitudes); }

  const std::vector<BlockExponential>& factors() const { return factors_; }

 private:
  std::vector<BlockExponential> factors_;
};

inline StateVector trotter_step(const StateVector& state, const EvolutionPlan& plan, const HamiltonianOperator& h) {
  if (plan.method != Method::trotter1) throw ConfigError("trotter_step requires the trotter1 method");
  StateVector out = state;
  TrotterStepper(h, plan.groups, plan.dt).step(out);
  return out;
}

// Spectral propagator for arbitrary t. Small components are diagonalized
// once; oversized ones fall back to Lanczos.
class ExactPropagator {
 public:
  static constexpr std::size_t kMaxActive = std::size_t{1} << 20;

  explicit ExactPropagator(const HamiltonianOperator& h) : ExactPropagator(h.total, active_dimension(h)) {}

  ExactPropagator(const ComplexSparse& h, std::size_t active) : matrix_(h) {
    if (active > kMaxActive) throw NumericalGuardError("exact evolution is limited to 2^20 active amplitudes");
    for (const auto& idx : detail::coupled_components(h)) {
      if (idx.size() > BlockExponential::kDenseLimit) {
        krylov_ = true;
        blocks_.clear();
        return;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(detail::dense_block(h, idx));
      blocks_.push_back(Block{idx, es.eigenvalues(), es.eigenvectors()});
    }
  }

  static std::size_t active_dimension(const HamiltonianOperator& h) {
    return static_cast<std::size_t>(h.components) * h.grid.num_points();
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v, double t) const {
    if (krylov_) return krylov_expm(matrix_, v, t);
    Eigen::VectorXcd out = v;
    for (const auto& b : blocks_) {
      const auto m = static_cast<Eigen::Index>(b.idx.size());
      Eigen::VectorXcd x(m);
      for (Eigen::Index k = 0; k < m; ++k) x[k] = v[b.idx[static_cast<std::size_t>(k)]];
      Eigen::VectorXcd c = b.vectors.adjoint() * x;
      for (Eigen::Index k = 0; k < m; ++k) c[k] *= std::exp(cplx(0.0, -b.values[k] * t));
      const Eigen::VectorXcd y = b.vectors * c;
      for (Eigen::Index k = 0; k < m; ++k) out[b.idx[static_cast<std::size_t>(k)]] = y[k];
    }
    return out;
  }

 private:
  struct Block {
    std::vector<Eigen::Index> idx;
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
  };
  ComplexSparse matrix_;
  bool krylov_ = false;
  std::vector<Block> blocks_;
};

inline StateVector exact_evolve(const StateVector& state, const HamiltonianOperator& h, double t) {
  StateVector out = state;
  out.amplitudes = ExactPropagator(h).apply(state.amplitudes, t);
  return out;
}

// Classical RK4 on d(psi)/dt = -i H psi.
inline void rk4_step(Eigen::VectorXcd& v, const ComplexSparse& h, double dt) {
  const cplx mi(0.0, -1.0);
  const Eigen::VectorXcd k1 = mi * (h * v);
  const Eigen::VectorXcd k2 = mi * (h * (v + 0.5 * dt * k1));
  const Eigen::VectorXcd k3 = mi * (h * (v + 0.5 * dt * k2));
  const Eigen::VectorXcd k4 = mi * (h * (v + dt * k3));
  v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline StateVector rk4_step(const StateVector& state, const HamiltonianOperator& h, double dt) {
  StateVector out = state;
  rk4_step(out.amplitudes, h.total, dt);
  return out;
}

struct Snapshot {
  std::size_t step = 0;
  double time = 0.0;
  StateVector state;
};

using SnapshotObserver = std::function<void(std::size_t step, double time, const StateVector&)>;

// Calls `observe` at step 0, every snapshot_stride steps, and at the final
// step.
inline void evolve(StateVector state, const EvolutionPlan& plan, const HamiltonianOperator& h,
                   const SnapshotObserver& observe) {
  plan.validate(h);
  std::function<void(Eigen::VectorXcd&)> advance;
  std::optional<TrotterStepper> trotter;
  std::optional<BlockExponential> exact;
  switch (plan.method) {
    case Method::trotter1:
      trotter.emplace(h, plan.groups, plan.dt);
      advance = [&](Eigen::VectorXcd& v) { trotter->step(v); };
      break;
    case Method::exact:
      if (ExactPropagator::active_dimension(h) > ExactPropagator::kMaxActive)
        throw NumericalGuardError("exact evolution is limited to 2^20 active amplitudes");
      exact.emplace(h.total, plan.dt);
      advance = [&](Eigen::VectorXcd& v) { exact->apply(v); };
      break;
    case Method::rk4:
      advance = [&](Eigen::VectorXcd& v) { rk4_step(v, h.total, plan.dt); };
      break;
  }
  observe(0, 0.0, state);
  for (std::size_t k = 1; k <= plan.n_steps; ++k) {
    advance(state.amplitudes);
    if (k % plan.snapshot_stride == 0 || k == plan.n_steps) observe(k, static_cast<double>(k) * plan.dt, state);
  }
}

inline std::vector<Snapshot> evolve_trajectory(const StateVector& state, const EvolutionPlan& plan,
                                               const HamiltonianOperator& h) {
  std::vector<Snapshot> out;
  evolve(state, plan, h, [&](std::size_t step, double t, const StateVector& s) { out.push_back({step, t, s}); });
  return out;
}

}  // namespace hsim
