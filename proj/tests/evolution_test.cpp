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

#include <random>

#include <gtest/gtest.h>

#include "hsim/evolution.hpp"

using namespace hsim;

namespace {

MaterialField random_material(const GridSpec& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.45, 1.0);
  MaterialField m = MaterialField::uniform(g);
  for (auto& c : m.c) c = u(rng);
  return m;
}

StateVector random_state(const HamiltonianOperator& h, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  StateVector s = h.empty_state();
  for (int mu = 0; mu < h.components; ++mu)
    for (auto& a : s.component(mu)) a = cplx(nd(rng), nd(rng));
  s.normalize();
  return s;
}

HamiltonianOperator small_tm(std::mt19937& rng, Boundary bc = Boundary::dirichlet) {
  const GridSpec g = GridSpec::make({2, 2}, 1.0, bc);
  return assemble_tm2d(g, random_material(g, rng));
}

}  // namespace

TEST(Trotter, SingleGroupIsExact) {
  std::mt19937 rng(1);
  const HamiltonianOperator h = small_tm(rng);
  const StateVector s = random_state(h, rng);
  EvolutionPlan p = make_plan(h, Method::trotter1, 0.05, 0.05);
  p.groups = single_group(h);
  const StateVector a = trotter_step(s, p, h);
  const StateVector b = exact_evolve(s, h, 0.05);
  EXPECT_LT((a.amplitudes - b.amplitudes).norm(), 1e-12);
}

TEST(Trotter, FirstOrderConvergence) {
  std::mt19937 rng(2);
  const HamiltonianOperator h = small_tm(rng);
  const StateVector s = random_state(h, rng);
  const Eigen::VectorXcd ref = exact_evolve(s, h, 1.0).amplitudes;
  std::vector<double> err;
  for (double dt : {0.04, 0.02, 0.01}) {
    StateVector v = s;
    const TrotterStepper stepper(h, axis_grouping(h), dt);
    for (long k = 0; k < std::lround(1.0 / dt); ++k) stepper.step(v);
    err.push_back((v.amplitudes - ref).norm());
  }
  for (int k = 0; k < 2; ++k) {
    const double ratio = err[k] / err[k + 1];
    EXPECT_GE(ratio, 1.7);
    EXPECT_LE(ratio, 2.3);
  }
}

TEST(Trotter, NormPreservedPerStep) {
  std::mt19937 rng(3);
  const HamiltonianOperator h = small_tm(rng, Boundary::neumann);
  StateVector s = random_state(h, rng);
  const TrotterStepper stepper(h, axis_grouping(h), 0.01);
  for (int k = 0; k < 500; ++k) {
    stepper.step(s);
    ASSERT_NEAR(s.norm(), 1.0, 1e-12);
  }
  EXPECT_LT(s.padding_weight(), 1e-24);
}

TEST(Trotter, TinyStepNearIdentity) {
  std::mt19937 rng(4);
  const HamiltonianOperator h = small_tm(rng, Boundary::periodic);
  const StateVector s = random_state(h, rng);
  const StateVector out = trotter_step(s, make_plan(h, Method::trotter1, 1e-6, 1e-6), h);
  const double hnorm = Eigen::MatrixXcd(h.total).operatorNorm();
  EXPECT_LE((out.amplitudes - s.amplitudes).norm(), 1e-5 * hnorm);
}

TEST(Trotter, RejectsNonHermitianGroup) {
  std::mt19937 rng(5);
  HamiltonianOperator h = small_tm(rng);
  h.terms[0].matrix.coeffRef(0, 20) += cplx(0.5, 0.0);
  EXPECT_THROW(TrotterStepper(h, axis_grouping(h), 0.01), NumericalGuardError);
}

TEST(Trotter, FactorsUseRealBlocks) {
  const GridSpec g = GridSpec::make({3, 3});
  const HamiltonianOperator h = assemble_tm2d(g, MaterialField::uniform(g));
  const TrotterStepper stepper(h, axis_grouping(h), 0.01);
  ASSERT_EQ(stepper.factors().size(), 2u);
  EXPECT_EQ(stepper.factors()[0].block_count(), 8u);
  EXPECT_FALSE(stepper.factors()[0].uses_krylov());
}

TEST(Plan, Validation) {
  std::mt19937 rng(6);
  const HamiltonianOperator h = small_tm(rng);
  EvolutionPlan p = make_plan(h, Method::trotter1, 0.1, 1.0);
  EXPECT_EQ(p.n_steps, 10u);
  p.groups = {{0}};
  EXPECT_THROW(p.validate(h), ConfigError);
  p.groups = {{0, 1}, {1}};
  EXPECT_THROW(p.validate(h), ConfigError);
  p.groups = axis_grouping(h);
  p.dt = -1.0;
  EXPECT_THROW(p.validate(h), ConfigError);
  EXPECT_THROW(parse_method("euler"), ConfigError);
}

TEST(Exact, IdentityAtZero) {
  std::mt19937 rng(7);
  const HamiltonianOperator h = small_tm(rng);
  const StateVector s = random_state(h, rng);
  EXPECT_LT((exact_evolve(s, h, 0.0).amplitudes - s.amplitudes).norm(), 1e-14);
}

TEST(Exact, EigenvectorPhase) {
  std::mt19937 rng(8);
  const HamiltonianOperator h = small_tm(rng, Boundary::periodic);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(h.total)};
  const Eigen::Index k = es.eigenvalues().size() - 1;
  StateVector s = h.empty_state();
  s.amplitudes = es.eigenvectors().col(k);
  const double t = 0.7;
  const Eigen::VectorXcd expect = std::exp(cplx(0.0, -es.eigenvalues()[k] * t)) * s.amplitudes;
  EXPECT_LT((exact_evolve(s, h, t).amplitudes - expect).norm(), 1e-12);
}

TEST(Exact, Semigroup) {
  std::mt19937 rng(9);
  const HamiltonianOperator h = small_tm(rng, Boundary::neumann);
  const StateVector s = random_state(h, rng);
  const ExactPropagator u(h);
  const Eigen::VectorXcd ab = u.apply(u.apply(s.amplitudes, 0.3), 0.45);
  EXPECT_LT((ab - u.apply(s.amplitudes, 0.75)).norm(), 1e-11);
  EXPECT_NEAR(u.apply(s.amplitudes, 5.0).norm(), 1.0, 1e-12);
}

TEST(Exact, KrylovAgreesWithDense) {
  std::mt19937 rng(10);
  const GridSpec g = GridSpec::make({3, 3});
  const HamiltonianOperator h = assemble_tm2d(g, random_material(g, rng));
  const StateVector s = random_state(h, rng);
  const Eigen::VectorXcd dense = ExactPropagator(h).apply(s.amplitudes, 2.5);
  const Eigen::VectorXcd kry = krylov_expm(h.total, s.amplitudes, 2.5);
  EXPECT_LT((dense - kry).norm(), 1e-11);
}

TEST(Exact, CostGuard) {
  const ComplexSparse m(4, 4);
  EXPECT_THROW(ExactPropagator(m, (std::size_t{1} << 20) + 1), NumericalGuardError);
}

TEST(Exact, EnergyConserved) {
  std::mt19937 rng(11);
  const HamiltonianOperator h = small_tm(rng);
  const StateVector s = random_state(h, rng);
  const double e0 = s.amplitudes.dot(h.apply(s.amplitudes)).real();
  const StateVector e = exact_evolve(s, h, 3.0);
  EXPECT_NEAR(e.amplitudes.dot(h.apply(e.amplitudes)).real(), e0, 1e-10);
}

TEST(Exact, GlobalPhaseCommutes) {
  std::mt19937 rng(12);
  const HamiltonianOperator h = small_tm(rng);
  StateVector s = random_state(h, rng);
  StateVector p = s;
  p.amplitudes *= std::exp(cplx(0.0, 0.9));
  const Eigen::VectorXcd a = exact_evolve(s, h, 1.0).amplitudes * std::exp(cplx(0.0, 0.9));
  EXPECT_LT((exact_evolve(p, h, 1.0).amplitudes - a).norm(), 1e-13);
}

TEST(Trajectory, ZeroHamiltonianIsStatic) {
  std::mt19937 rng(13);
  HamiltonianOperator h = small_tm(rng);
  for (auto& t : h.terms) t.matrix.setZero();
  h.total.setZero();
  const StateVector s = random_state(h, rng);
  const auto traj = evolve_trajectory(s, make_plan(h, Method::trotter1, 0.1, 1.0, 3), h);
  ASSERT_EQ(traj.size(), 5u);
  EXPECT_EQ(traj.back().step, 10u);
  for (const auto& snap : traj) EXPECT_EQ(snap.state.amplitudes, s.amplitudes);
}

TEST(Trajectory, StrideAndNorms) {
  std::mt19937 rng(14);
  const HamiltonianOperator h = small_tm(rng);
  const StateVector s = random_state(h, rng);
  for (Method m : {Method::trotter1, Method::exact}) {
    const auto traj = evolve_trajectory(s, make_plan(h, m, 0.01, 2.0, 20), h);
    ASSERT_EQ(traj.size(), 11u);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      EXPECT_EQ(traj[k].step, 20 * k);
      EXPECT_NEAR(traj[k].time, 0.2 * static_cast<double>(k), 1e-12);
      EXPECT_NEAR(traj[k].state.norm(), 1.0, 1e-10);
    }
  }
  const auto rk = evolve_trajectory(s, make_plan(h, Method::rk4, 0.01, 2.0, 200), h);
  const Eigen::VectorXcd ref = exact_evolve(s, h, 2.0).amplitudes;
  EXPECT_LT((rk.back().state.amplitudes - ref).norm(), 1e-8);
}

TEST(Trajectory, Deterministic) {
  std::mt19937 rng(15);
  const HamiltonianOperator h = small_tm(rng);
  const StateVector s = random_state(h, rng);
  const auto plan = make_plan(h, Method::trotter1, 0.02, 1.0, 5);
  const auto a = evolve_trajectory(s, plan, h), b = evolve_trajectory(s, plan, h);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].state.amplitudes, b[k].state.amplitudes);
}

TEST(Trotter, FieldSplitKeepsMagneticFieldDivergenceFree) {
  const GridSpec g = GridSpec::make({2, 2, 1}, 1.0, Boundary::periodic);
  std::mt19937 rng(21);
  const MaterialField m = random_material(g, rng);
  std::normal_distribution<double> nd;
  std::array<Eigen::VectorXd, 3> a, ad;
  for (int r = 0; r < 3; ++r) {
    a[r] = Eigen::VectorXd::NullaryExpr(32, [&] { return nd(rng); });
    ad[r] = Eigen::VectorXd::NullaryExpr(32, [&] { return nd(rng); });
  }
  const HamiltonianOperator h = assemble_full3d(g, m);
  const EvolutionPlan plan = make_plan(h, Method::trotter1, 0.05, 2.0, 5);
  ASSERT_EQ(plan.groups.size(), 3u);
  double worst = 0.0;
  evolve(full3d_state_from_potential(g, m, a, ad), plan, h,
         [&](std::size_t, double, const StateVector& s) { worst = std::max(worst, discrete_div_of_B(s).maxCoeff()); });
  EXPECT_LT(worst, 1e-12);
}

TEST(Plan, DefaultGroupingPerSystem) {
  const GridSpec g2 = GridSpec::make({2, 2});
  EXPECT_EQ(default_grouping(assemble_tm2d(g2, MaterialField::uniform(g2))).size(), 2u);
  const GridSpec g3 = GridSpec::make({1, 1, 1});
  const HamiltonianOperator h = assemble_full3d(g3, MaterialField::uniform(g3));
  const TermGrouping fields = field_grouping(h);
  ASSERT_EQ(fields.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t k : fields[r]) EXPECT_EQ(h.terms[k].field, static_cast<int>(r));
}
