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

#include "platoon/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace platoon
{
namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowKind { kGeneral, kLower, kUpper };

// Constraint in the solver's internal form  n'x >= b.
struct Constraint
{
  RowKind kind;
  int index;
  double norm;
};

class ConstraintSet
{
public:
  explicit ConstraintSet(const QpProblem & p) : p_(p)
  {
    const int n = p.num_variables();
    for (int r = 0; r < p.num_inequalities(); ++r) {
      const double nrm = p.G.row(r).norm();
      if (nrm > 0.0) {
        rows_.push_back({RowKind::kGeneral, r, nrm});
      } else if (p.h(r) < 0.0) {
        empty_row_violated_ = true;
      }
    }
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(p.lb(j))) rows_.push_back({RowKind::kLower, j, 1.0});
    }
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(p.ub(j))) rows_.push_back({RowKind::kUpper, j, 1.0});
    }
  }

  int size() const { return static_cast<int>(rows_.size()); }
  /// A row 0'x <= h with h < 0 makes the problem infeasible outright.
  bool empty_row_violated() const { return empty_row_violated_; }
  const Constraint & operator[](int i) const { return rows_[i]; }

  Eigen::VectorXd normal(int i) const
  {
    const Constraint & c = rows_[i];
    switch (c.kind) {
      case RowKind::kGeneral:
        return -p_.G.row(c.index).transpose();
      case RowKind::kLower:
        return Eigen::VectorXd::Unit(p_.num_variables(), c.index);
      case RowKind::kUpper:
      default:
        return -Eigen::VectorXd::Unit(p_.num_variables(), c.index);
    }
  }

  // n'x - b; nonnegative when satisfied.
  double slack(int i, const Eigen::VectorXd & x) const
  {
    const Constraint & c = rows_[i];
    switch (c.kind) {
      case RowKind::kGeneral:
        return p_.h(c.index) - p_.G.row(c.index).dot(x);
      case RowKind::kLower:
        return x(c.index) - p_.lb(c.index);
      case RowKind::kUpper:
      default:
        return p_.ub(c.index) - x(c.index);
    }
  }

private:
  const QpProblem & p_;
  std::vector<Constraint> rows_;
  bool empty_row_violated_{false};
};

void validate(const QpProblem & p)
{
  const Eigen::Index n = p.g.size();
  if (p.H.rows() != n || p.H.cols() != n || p.lb.size() != n || p.ub.size() != n) {
    throw std::invalid_argument("qp: dimension mismatch between H, g, lb, ub");
  }
  if (p.G.rows() != p.h.size() || (p.G.rows() > 0 && p.G.cols() != n)) {
    throw std::invalid_argument("qp: dimension mismatch between G and h");
  }
  if (!p.H.allFinite() || !p.g.allFinite() || !p.G.allFinite() || !p.h.allFinite()) {
    throw std::invalid_argument("qp: non-finite problem data");
  }
  if ((p.H - p.H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, p.H.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("qp: H is not symmetric");
  }
}

}  // namespace

std::string_view to_string(QpStatus status)
{
  switch (status) {
    case QpStatus::kOptimal:
      return "optimal";
    case QpStatus::kMaxIter:
      return "max_iter";
    case QpStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

QpProblem QpProblem::unconstrained(const Eigen::MatrixXd & H, const Eigen::VectorXd & g)
{
  const Eigen::Index n = g.size();
  return QpProblem{
    H, g, Eigen::VectorXd::Constant(n, -kInf), Eigen::VectorXd::Constant(n, kInf),
    Eigen::MatrixXd(0, n), Eigen::VectorXd(0)};
}

double max_violation(const QpProblem & p, const Eigen::VectorXd & x)
{
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    worst = std::max({worst, p.lb(j) - x(j), x(j) - p.ub(j)});
  }
  if (p.h.size() > 0) {
    worst = std::max(worst, (p.G * x - p.h).maxCoeff());
  }
  return worst;
}

double kkt_residual(
  const QpProblem & p, const Eigen::VectorXd & x, const Eigen::VectorXd & lambda_rows,
  const Eigen::VectorXd & lambda_lb, const Eigen::VectorXd & lambda_ub)
{
  Eigen::VectorXd grad = p.H * x + p.g + lambda_ub - lambda_lb;
  if (p.h.size() > 0) {
    grad += p.G.transpose() * lambda_rows;
  }
  double res = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  res = std::max(res, max_violation(p, x));

  auto complement = [&res](double lambda, double slack) {
    res = std::max(res, -lambda);
    if (lambda != 0.0) {
      res = std::max(res, std::abs(lambda * slack));
    }
  };
  for (Eigen::Index r = 0; r < p.h.size(); ++r) {
    complement(lambda_rows(r), p.h(r) - p.G.row(r).dot(x));
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    complement(lambda_lb(j), std::isfinite(p.lb(j)) ? x(j) - p.lb(j) : 0.0);
    complement(lambda_ub(j), std::isfinite(p.ub(j)) ? p.ub(j) - x(j) : 0.0);
  }
  return res;
}

QpSolution solve(const QpProblem & problem, const QpSettings & settings)
{
  validate(problem);
  const int n = problem.num_variables();

  QpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);

  if ((problem.lb.array() > problem.ub.array()).any()) {
    sol.status = QpStatus::kInfeasible;
    sol.objective = problem.objective(sol.x);
    sol.kkt_residual = kInf;
    return sol;
  }

  Eigen::MatrixXd H = 0.5 * (problem.H + problem.H.transpose());
  H.diagonal().array() += settings.regularization;
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (problem.H + problem.H.transpose()));
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -1e-9) {
      throw std::invalid_argument("qp: H is not positive semidefinite");
    }
    H.diagonal().array() += std::abs(min_eig) + settings.regularization;
    llt.compute(H);
  }
  const Eigen::MatrixXd H_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  const ConstraintSet cons(problem);
  const double viol_tol = 1e-3 * settings.tol;

  if (cons.empty_row_violated()) {
    sol.status = QpStatus::kInfeasible;
    sol.objective = problem.objective(sol.x);
    sol.kkt_residual = kInf;
    return sol;
  }

  Eigen::VectorXd x = -H_inv * problem.g;
  double f = 0.5 * problem.g.dot(x);
  auto record = [&] {
    if (settings.record_history) sol.objective_history.push_back(f);
  };
  record();

  std::vector<int> active;
  std::vector<double> u;  // multipliers of the active set, in the internal >= form

  int iterations = 0;
  bool infeasible = false;
  bool converged = false;

  while (iterations < settings.max_iter) {
    // Most violated constraint, scaled by its normal's length.
    int p = -1;
    double worst = -viol_tol;
    for (int i = 0; i < cons.size(); ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double s = cons.slack(i, x) / cons[i].norm;
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) {
      converged = true;
      break;
    }

    const Eigen::VectorXd n_p = cons.normal(p);
    std::vector<double> u_plus = u;
    u_plus.push_back(0.0);

    bool added = false;
    while (!added && iterations < settings.max_iter) {
      ++iterations;
      const int q = static_cast<int>(active.size());

      Eigen::VectorXd z = H_inv * n_p;
      Eigen::VectorXd r(q);
      if (q > 0) {
        Eigen::MatrixXd N(n, q);
        for (int k = 0; k < q; ++k) N.col(k) = cons.normal(active[k]);
        const Eigen::MatrixXd H_inv_N = H_inv * N;
        const Eigen::MatrixXd M = N.transpose() * H_inv_N;
        r = M.ldlt().solve(H_inv_N.transpose() * n_p);
        z -= H_inv_N * r;
      }

      // Partial step: largest dual step before an active multiplier hits zero.
      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < q; ++k) {
        if (r(k) > 0.0) {
          const double t = u_plus[k] / r(k);
          if (t < t1) {
            t1 = t;
            drop = k;
          }
        }
      }

      // Full step: primal step that makes constraint p active.
      const double zn = z.dot(n_p);
      const bool z_null = z.norm() <= 1e-12 * std::max(1.0, (H_inv * n_p).norm()) || zn <= 0.0;
      const double t2 = z_null ? kInf : -cons.slack(p, x) / zn;

      if (!std::isfinite(t1) && !std::isfinite(t2)) {
        infeasible = true;
        break;
      }

      if (!std::isfinite(t2)) {
        // Dual step only.
        for (int k = 0; k < q; ++k) u_plus[k] -= t1 * r(k);
        u_plus[q] += t1;
        active.erase(active.begin() + drop);
        u_plus.erase(u_plus.begin() + drop);
        continue;
      }

      const double t = std::min(t1, t2);
      x += t * z;
      f += t * zn * (0.5 * t + u_plus[q]);
      for (int k = 0; k < q; ++k) u_plus[k] -= t * r(k);
      u_plus[q] += t;
      record();

      if (t2 <= t1) {
        active.push_back(p);
        u = u_plus;
        added = true;
      } else {
        active.erase(active.begin() + drop);
        u_plus.erase(u_plus.begin() + drop);
      }
    }
    if (infeasible) break;
  }

  // Active box bounds hold exactly, not merely to rounding.
  if (converged) {
    for (int i : active) {
      const Constraint & c = cons[i];
      if (c.kind == RowKind::kLower) x(c.index) = problem.lb(c.index);
      if (c.kind == RowKind::kUpper) x(c.index) = problem.ub(c.index);
    }
  }

  sol.x = x;
  sol.iterations = iterations;
  sol.objective = problem.objective(x);

  Eigen::VectorXd lambda_rows = Eigen::VectorXd::Zero(problem.num_inequalities());
  Eigen::VectorXd lambda_lb = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd lambda_ub = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < active.size() && k < u.size(); ++k) {
    const Constraint & c = cons[active[k]];
    switch (c.kind) {
      case RowKind::kGeneral:
        lambda_rows(c.index) = u[k];
        break;
      case RowKind::kLower:
        lambda_lb(c.index) = u[k];
        break;
      case RowKind::kUpper:
        lambda_ub(c.index) = u[k];
        break;
    }
  }
  sol.kkt_residual = kkt_residual(problem, x, lambda_rows, lambda_lb, lambda_ub);

  if (infeasible) {
    sol.status = QpStatus::kInfeasible;
  } else if (converged && sol.kkt_residual <= settings.tol) {
    sol.status = QpStatus::kOptimal;
  } else {
    sol.status = QpStatus::kMaxIter;
  }
  return sol;
}

}  // namespace platoon
