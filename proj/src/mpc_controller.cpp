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

#include "platoon/mpc_controller.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <vector>

namespace platoon
{
namespace
{

constexpr int kNx = 4;
constexpr int kNu = 2;

std::string lower(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_config(const MpcConfig & c)
{
  if (c.horizon.steps < 1) throw ControllerConfigError("horizon must have at least one step");
  if (!(c.horizon.dt > 0.0)) throw ControllerConfigError("horizon dt must be positive");
  if (c.policy.mode != ControlMode::kPlatooning && !(c.policy.t_gap > 0.0)) {
    throw ControllerConfigError("t_gap must be positive for time-gap spacing");
  }
  if (c.policy.mode == ControlMode::kPlatooning && !(c.policy.d_const > 0.0)) {
    throw ControllerConfigError("d_const must be positive for Platooning");
  }
  if (c.policy.d_safety < 0.0) throw ControllerConfigError("d_safety must be nonnegative");
  const MpcWeights & w = c.weights;
  if ((w.q_ego.array() < 0.0).any() || (w.r_u.array() < 0.0).any() || (w.r_du.array() < 0.0).any() ||
      w.q_gap < 0.0 || w.q_rel_speed < 0.0) {
    throw ControllerConfigError("MPC weights must be nonnegative");
  }
  const MpcBounds & b = c.bounds;
  if (!(b.a_min <= 0.0 && 0.0 <= b.a_max)) throw ControllerConfigError("need a_min <= 0 <= a_max");
  if (b.da_max < 0.0 || b.ddelta_max < 0.0 || b.delta_max < 0.0) {
    throw ControllerConfigError("rate and steering bounds must be nonnegative");
  }
}

void check_neighbors(ControlMode mode, std::span<const NeighborPrediction> neighbors)
{
  if (neighbors.empty()) {
    throw ControllerConfigError("follower has no neighbors");
  }
  int radar = 0;
  for (const auto & nb : neighbors) {
    if (nb.hops < 1) throw ControllerConfigError("neighbor hops must be >= 1");
    if (nb.hops == 1) ++radar;
  }
  if (radar != 1) {
    throw ControllerConfigError("exactly one radar predecessor (hops == 1) is required");
  }
  if (mode == ControlMode::kAcc && neighbors.size() != 1) {
    throw ControllerConfigError("ACC uses the radar predecessor only");
  }
}

}  // namespace

std::string_view to_string(ControlMode mode)
{
  switch (mode) {
    case ControlMode::kAcc:
      return "ACC";
    case ControlMode::kCacc:
      return "CACC";
    case ControlMode::kPlatooning:
      return "Platooning";
  }
  return "unknown";
}

std::optional<ControlMode> parse_control_mode(std::string_view text)
{
  const std::string s = lower(text);
  if (s == "acc") return ControlMode::kAcc;
  if (s == "cacc") return ControlMode::kCacc;
  if (s == "platooning") return ControlMode::kPlatooning;
  return std::nullopt;
}

NeighborPrediction radar_neighbor(
  const VehicleState & ego, const RelativeState & radar, double vehicle_length)
{
  return {1, ego.x + vehicle_length + radar.gap, ego.v + radar.rel_speed, 0.0};
}

double desired_gap(const SpacingPolicy & policy, double v_ego, int hops)
{
  if (hops < 1) {
    throw ControllerConfigError("desired_gap: hops must be >= 1");
  }
  return hops * (policy.standstill() + policy.headway() * v_ego);
}

QpProblem build_problem(
  const MpcConfig & config, const VehicleState & ego, const ControlInput & prev_input,
  std::span<const NeighborPrediction> neighbors)
{
  check_config(config);
  check_neighbors(config.policy.mode, neighbors);

  const int T = config.horizon.steps;
  const double dt = config.horizon.dt;
  const int n = kNu * T;
  const double L = config.vehicle_length;
  const MpcWeights & w = config.weights;
  const MpcBounds & b = config.bounds;
  const double tau = config.policy.headway();
  const double standstill = config.policy.standstill();

  const LinearModel model = linearize({ego.v, ego.phi, prev_input.delta}, dt, L);

  // Free response s_k and input sensitivities Gamma_k (rows of z_k w.r.t. U).
  std::vector<Eigen::Vector4d> free(T + 1);
  std::vector<Eigen::MatrixXd> gamma(T + 1, Eigen::MatrixXd::Zero(kNx, n));
  free[0] = ego.to_vector();
  for (int k = 1; k <= T; ++k) {
    free[k] = model.A * free[k - 1] + model.C;
    gamma[k] = model.A * gamma[k - 1];
    gamma[k].middleCols(kNu * (k - 1), kNu) = model.B;
  }

  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.g = Eigen::VectorXd::Zero(n);

  // Quadratic terms are accumulated as w * (c - r'U)^2.
  auto add_square = [&qp](double weight, const Eigen::VectorXd & r, double c) {
    if (weight == 0.0) return;
    qp.H.noalias() += 2.0 * weight * r * r.transpose();
    qp.g.noalias() -= 2.0 * weight * c * r;
  };

  // Ego term: hold the current speed on a zero-heading line.
  if ((w.q_ego.array() > 0.0).any()) {
    for (int k = 1; k <= T; ++k) {
      const Eigen::Vector4d ref{ego.x + ego.v * k * dt, ego.y, ego.v, 0.0};
      for (int s = 0; s < kNx; ++s) {
        add_square(w.q_ego(s), gamma[k].row(s).transpose(), ref(s) - free[k](s));
      }
    }
  }

  // Neighbor terms. Each neighbor j contributes, per step, q_gap * e_j^2 with
  //   e_j = [x_j - h_j (L + standstill)] - (x_k + h_j tau v_k),
  // and q_rel_speed * (v_j - v_k)^2. Sums over neighbors are folded so the
  // outer products are formed once per step.
  double sum_h = 0.0;
  double sum_h2 = 0.0;
  for (const auto & nb : neighbors) {
    sum_h += nb.hops;
    sum_h2 += static_cast<double>(nb.hops) * nb.hops;
  }
  const double count = static_cast<double>(neighbors.size());
  for (int k = 1; k <= T; ++k) {
    const double t = k * dt;
    const Eigen::VectorXd gx = gamma[k].row(kX).transpose();
    const Eigen::VectorXd gv = gamma[k].row(kV).transpose();
    const double sx = free[k](kX);
    const double sv = free[k](kV);

    double sum_c = 0.0;
    double sum_ch = 0.0;
    double sum_dv = 0.0;
    for (const auto & nb : neighbors) {
      const double c = nb.x_at(t) - nb.hops * (L + standstill) - sx - nb.hops * tau * sv;
      sum_c += c;
      sum_ch += c * nb.hops;
      sum_dv += nb.v_at(t) - sv;
    }

    const double qg = 2.0 * w.q_gap;
    const double qv = 2.0 * w.q_rel_speed;
    if (qg != 0.0) {
      qp.H.noalias() += qg * count * gx * gx.transpose();
      qp.H.noalias() += qg * tau * sum_h * (gx * gv.transpose() + gv * gx.transpose());
      qp.H.noalias() += qg * tau * tau * sum_h2 * gv * gv.transpose();
      qp.g.noalias() -= qg * (sum_c * gx + tau * sum_ch * gv);
    }
    if (qv != 0.0) {
      qp.H.noalias() += qv * count * gv * gv.transpose();
      qp.g.noalias() -= qv * sum_dv * gv;
    }
  }

  // Input magnitude and rate penalties.
  for (int k = 0; k < T; ++k) {
    for (int i = 0; i < kNu; ++i) {
      const int col = kNu * k + i;
      qp.H(col, col) += 2.0 * w.r_u(i);
      qp.H(col, col) += 2.0 * w.r_du(i);
      if (k == 0) {
        qp.g(col) -= 2.0 * w.r_du(i) * prev_input.to_vector()(i);
      } else {
        const int prev = col - kNu;
        qp.H(prev, prev) += 2.0 * w.r_du(i);
        qp.H(col, prev) -= 2.0 * w.r_du(i);
        qp.H(prev, col) -= 2.0 * w.r_du(i);
      }
    }
  }

  // Box bounds; the first step also carries the rate bound against prev_input.
  const Eigen::Vector2d u_lo{b.a_min, -b.delta_max};
  const Eigen::Vector2d u_hi{b.a_max, b.delta_max};
  const Eigen::Vector2d du{b.da_max, b.ddelta_max};
  qp.lb.resize(n);
  qp.ub.resize(n);
  for (int k = 0; k < T; ++k) {
    qp.lb.segment<kNu>(kNu * k) = u_lo;
    qp.ub.segment<kNu>(kNu * k) = u_hi;
  }
  for (int i = 0; i < kNu; ++i) {
    const double p = prev_input.to_vector()(i);
    qp.lb(i) = std::min(u_hi(i), std::max(u_lo(i), p - du(i)));
    qp.ub(i) = std::max(u_lo(i), std::min(u_hi(i), p + du(i)));
  }

  // Inequality rows: input rates (k >= 1), speed limits, collision avoidance.
  const NeighborPrediction * radar = nullptr;
  for (const auto & nb : neighbors) {
    if (nb.hops == 1) radar = &nb;
  }
  const int rate_rows = 2 * kNu * (T - 1);
  const int speed_rows = 2 * T;
  const int collision_rows = T;
  qp.G = Eigen::MatrixXd::Zero(rate_rows + speed_rows + collision_rows, n);
  qp.h = Eigen::VectorXd::Zero(qp.G.rows());
  int row = 0;
  for (int k = 1; k < T; ++k) {
    for (int i = 0; i < kNu; ++i) {
      const int col = kNu * k + i;
      qp.G(row, col) = 1.0;
      qp.G(row, col - kNu) = -1.0;
      qp.h(row++) = du(i);
      qp.G(row, col) = -1.0;
      qp.G(row, col - kNu) = 1.0;
      qp.h(row++) = du(i);
    }
  }
  for (int k = 1; k <= T; ++k) {
    const Eigen::VectorXd gv = gamma[k].row(kV).transpose();
    qp.G.row(row) = gv.transpose();
    qp.h(row++) = b.v_max - free[k](kV);
    qp.G.row(row) = -gv.transpose();
    qp.h(row++) = free[k](kV) - b.v_min;
  }
  for (int k = 1; k <= T; ++k) {
    qp.G.row(row) = gamma[k].row(kX);
    qp.h(row++) = radar->x_at(k * dt) - L - config.policy.d_safety - free[k](kX);
  }
  return qp;
}

ControlResult compute_control(
  const MpcConfig & config, const VehicleState & ego, const ControlInput & prev_input,
  std::span<const NeighborPrediction> neighbors, const QpSettings & settings)
{
  const QpProblem qp = build_problem(config, ego, prev_input, neighbors);
  const QpSolution sol = solve(qp, settings);
  const MpcBounds & b = config.bounds;

  ControlResult result;
  result.status = sol.status;
  result.iterations = sol.iterations;
  result.kkt_residual = sol.kkt_residual;
  if (sol.status == QpStatus::kInfeasible) {
    result.fallback = true;
    result.input = {b.a_min, 0.0};
    return result;
  }
  result.input.a = std::clamp(sol.x(kAccel), b.a_min, b.a_max);
  result.input.delta = std::clamp(sol.x(kSteer), -b.delta_max, b.delta_max);
  return result;
}

}  // namespace platoon
