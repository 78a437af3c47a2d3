// Copyright 2026 The platoon_mpc Authors
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

#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "platoon/qp_solver.hpp"
#include "test_support.hpp"

namespace platoon
{
namespace
{

// Random problem with box bounds and a few general rows, built so that the
// origin is strictly feasible.
QpProblem random_general_qp(std::mt19937_64 & rng, int n, int m)
{
  QpProblem p = test::random_box_qp(rng, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> slack(0.1, 1.0);
  p.G.resize(m, n);
  p.h.resize(m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) p.G(r, c) = normal(rng);
    p.h(r) = slack(rng);
  }
  return p;
}

TEST(QpSolver, UnconstrainedStationaryPoint)
{
  const QpProblem p = QpProblem::unconstrained(Eigen::Matrix2d::Identity(), Eigen::Vector2d(-1, -1));
  const QpSolution s = solve(p);
  EXPECT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_NEAR(s.x(0), 1.0, 1e-8);
  EXPECT_NEAR(s.x(1), 1.0, 1e-8);
  EXPECT_NEAR(s.objective, -1.0, 1e-8);
}

TEST(QpSolver, SingleActiveUpperBound)
{
  QpProblem p = QpProblem::unconstrained(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, -4.0));
  p.ub(0) = 1.0;
  const QpSolution s = solve(p);
  EXPECT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_NEAR(s.x(0), 1.0, 1e-8);
}

TEST(QpSolver, MatchesActiveSetEnumerationOnBoxProblems)
{
  std::mt19937_64 rng(2026);
  for (int k = 0; k < 20; ++k) {
    const QpProblem p = test::random_box_qp(rng);
    const auto oracle = test::enumerate_active_sets(p);
    ASSERT_TRUE(oracle.has_value());
    const QpSolution s = solve(p);
    ASSERT_EQ(s.status, QpStatus::kOptimal);
    EXPECT_LE((s.x - *oracle).cwiseAbs().maxCoeff(), 1e-6) << "problem " << k;
  }
}

TEST(QpSolver, MatchesActiveSetEnumerationWithGeneralRows)
{
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const QpProblem p = random_general_qp(rng, 3, 4);
    const auto oracle = test::enumerate_active_sets(p);
    ASSERT_TRUE(oracle.has_value());
    const QpSolution s = solve(p);
    ASSERT_EQ(s.status, QpStatus::kOptimal);
    EXPECT_LE((s.x - *oracle).cwiseAbs().maxCoeff(), 1e-6) << "problem " << k;
  }
}

TEST(QpSolver, OptimalSolutionsAreFeasibleWithSmallKktResidual)
{
  std::mt19937_64 rng(99);
  const QpSettings settings;
  for (int k = 0; k < 50; ++k) {
    const QpProblem p = random_general_qp(rng, 8, 6);
    const QpSolution s = solve(p, settings);
    ASSERT_EQ(s.status, QpStatus::kOptimal);
    EXPECT_LE(max_violation(p, s.x), settings.tol);
    EXPECT_LE(s.kkt_residual, settings.tol);
  }
}

TEST(QpSolver, NoFeasibleDirectionImprovesTheObjective)
{
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double step = 1e-3;
  for (int k = 0; k < 10; ++k) {
    const QpProblem p = random_general_qp(rng, 5, 3);
    const QpSolution s = solve(p);
    ASSERT_EQ(s.status, QpStatus::kOptimal);
    int tried = 0;
    for (int attempt = 0; attempt < 100000 && tried < 50; ++attempt) {
      Eigen::VectorXd d(5);
      for (int i = 0; i < 5; ++i) d(i) = normal(rng);
      d.normalize();
      for (const double sign : {1.0, -1.0}) {
        const Eigen::VectorXd y = s.x + sign * step * d;
        if (max_violation(p, y) > 0.0) continue;
        EXPECT_GE(p.objective(y), s.objective - 1e-8);
        ++tried;
      }
    }
    EXPECT_GE(tried, 50);
  }
}

TEST(QpSolver, DeterministicBitForBit)
{
  std::mt19937_64 rng(12);
  const QpProblem p = random_general_qp(rng, 6, 5);
  const QpSolution a = solve(p);
  const QpSolution b = solve(p);
  ASSERT_EQ(a.x.size(), b.x.size());
  EXPECT_EQ(std::memcmp(a.x.data(), b.x.data(), sizeof(double) * a.x.size()), 0);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(QpSolver, DualObjectiveNeverDecreases)
{
  std::mt19937_64 rng(21);
  QpSettings settings;
  settings.record_history = true;
  for (int k = 0; k < 20; ++k) {
    const QpProblem p = random_general_qp(rng, 6, 6);
    const QpSolution s = solve(p, settings);
    ASSERT_FALSE(s.objective_history.empty());
    for (std::size_t i = 1; i < s.objective_history.size(); ++i) {
      EXPECT_GE(s.objective_history[i], s.objective_history[i - 1] - 1e-9);
    }
    EXPECT_NEAR(s.objective_history.back(), s.objective, 1e-9 * (1.0 + std::abs(s.objective)));
  }
}

TEST(QpSolver, InconsistentBoundsAreInfeasible)
{
  QpProblem p = QpProblem::unconstrained(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero());
  p.lb(0) = 1.0;
  p.ub(0) = 0.0;
  EXPECT_EQ(solve(p).status, QpStatus::kInfeasible);
}

TEST(QpSolver, ContradictoryRowsAreInfeasible)
{
  QpProblem p = QpProblem::unconstrained(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1));
  p.G.resize(2, 1);
  p.G << 1.0, -1.0;
  p.h.resize(2);
  p.h << -1.0, -1.0;  // x <= -1 and x >= 1
  EXPECT_EQ(solve(p).status, QpStatus::kInfeasible);
}

TEST(QpSolver, ViolatedZeroRowIsInfeasible)
{
  QpProblem p = QpProblem::unconstrained(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
  p.G = Eigen::MatrixXd::Zero(1, 2);
  p.h = Eigen::VectorXd::Constant(1, -0.5);
  EXPECT_EQ(solve(p).status, QpStatus::kInfeasible);
}

TEST(QpSolver, RejectsIndefiniteHessian)
{
  Eigen::Matrix2d H;
  H << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(solve(QpProblem::unconstrained(H, Eigen::Vector2d::Zero())), std::invalid_argument);
}

TEST(QpSolver, RejectsAsymmetricHessian)
{
  Eigen::Matrix2d H;
  H << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(solve(QpProblem::unconstrained(H, Eigen::Vector2d::Zero())), std::invalid_argument);
}

TEST(QpSolver, RejectsMismatchedDimensions)
{
  QpProblem p = QpProblem::unconstrained(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero());
  p.lb = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(solve(p), std::invalid_argument);
}

TEST(QpSolver, SemidefiniteHessianWithBoundsIsSolved)
{
  // Zero curvature in x1; the bound decides it.
  Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
  H(0, 0) = 1.0;
  QpProblem p = QpProblem::unconstrained(H, Eigen::Vector2d(-1.0, -1.0));
  p.ub(1) = 2.0;
  const QpSolution s = solve(p);
  EXPECT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_NEAR(s.x(0), 1.0, 1e-6);
  EXPECT_NEAR(s.x(1), 2.0, 1e-6);
}

TEST(QpSolver, IterationCapIsReported)
{
  std::mt19937_64 rng(8);
  const QpProblem p = random_general_qp(rng, 8, 8);
  QpSettings settings;
  const QpSolution full = solve(p, settings);
  ASSERT_GT(full.iterations, 1);
  settings.max_iter = 1;
  EXPECT_EQ(solve(p, settings).status, QpStatus::kMaxIter);
}

}  // namespace
}  // namespace platoon
