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

#ifndef PLATOON__QP_SOLVER_HPP_
#define PLATOON__QP_SOLVER_HPP_

#include <Eigen/Core>
#include <string_view>
#include <vector>

namespace platoon
{

/// minimize 0.5 x'Hx + g'x  s.t.  lb <= x <= ub,  G x <= h.
/// Infinite bounds are allowed and ignored.
struct QpProblem
{
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  /// Unconstrained problem of dimension n (infinite bounds, no rows).
  static QpProblem unconstrained(const Eigen::MatrixXd & H, const Eigen::VectorXd & g);

  int num_variables() const { return static_cast<int>(g.size()); }
  int num_inequalities() const { return static_cast<int>(h.size()); }
  double objective(const Eigen::VectorXd & x) const { return 0.5 * x.dot(H * x) + g.dot(x); }
};

enum class QpStatus { kOptimal, kMaxIter, kInfeasible };

std::string_view to_string(QpStatus status);

struct QpSolution
{
  Eigen::VectorXd x;
  double objective{0.0};
  double kkt_residual{0.0};
  int iterations{0};
  QpStatus status{QpStatus::kInfeasible};
  /// Dual-ascent objective after every step; only filled when requested.
  std::vector<double> objective_history;
};

struct QpSettings
{
  double tol{1e-6};
  int max_iter{4000};
  double regularization{1e-9};
  bool record_history{false};
};

/// Dense dual active-set solver (Goldfarb-Idnani). Requires H symmetric PSD;
/// throws std::invalid_argument otherwise. Inconsistent bounds or an empty
/// feasible set are reported through the status, not thrown.
QpSolution solve(const QpProblem & problem, const QpSettings & settings = {});

/// Largest violation of: stationarity, primal feasibility, dual sign, and
/// complementarity. `lambda_rows` are multipliers of Gx <= h; `lambda_lb` and
/// `lambda_ub` those of the box (all >= 0 at a KKT point).
double kkt_residual(
  const QpProblem & problem, const Eigen::VectorXd & x, const Eigen::VectorXd & lambda_rows,
  const Eigen::VectorXd & lambda_lb, const Eigen::VectorXd & lambda_ub);

/// Max of bound and row violations at x (0 when feasible).
double max_violation(const QpProblem & problem, const Eigen::VectorXd & x);

}  // namespace platoon

#endif  // PLATOON__QP_SOLVER_HPP_
