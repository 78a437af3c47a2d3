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

#ifndef PLATOON__MPC_CONTROLLER_HPP_
#define PLATOON__MPC_CONTROLLER_HPP_

#include <Eigen/Core>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "platoon/qp_solver.hpp"
#include "platoon/vehicle_model.hpp"

namespace platoon
{

enum class ControlMode { kAcc, kCacc, kPlatooning };

std::string_view to_string(ControlMode mode);
/// Accepts "ACC", "CACC", "Platooning" (case-insensitive).
std::optional<ControlMode> parse_control_mode(std::string_view text);

/// Raised when the controller is asked to act on an impossible neighbor set.
class ControllerConfigError : public std::invalid_argument
{
public:
  explicit ControllerConfigError(const std::string & what) : std::invalid_argument(what) {}
};

struct SpacingPolicy
{
  ControlMode mode{ControlMode::kCacc};
  double t_gap{0.8};     // [s], time-gap modes (ACC, CACC)
  double d_const{15.0};  // [m], Platooning
  double d_safety{0.0};  // [m]

  /// Seconds of headway per unit of ego speed; zero for constant-distance spacing.
  double headway() const { return mode == ControlMode::kPlatooning ? 0.0 : t_gap; }
  /// Speed-independent part of the single-hop gap.
  double standstill() const { return mode == ControlMode::kPlatooning ? d_const : d_safety; }
};

struct MpcWeights
{
  Eigen::Vector4d q_ego{Eigen::Vector4d::Zero()};  // [x, y, v, phi]
  Eigen::Vector2d r_u{0.1, 0.1};                   // [a, delta]
  Eigen::Vector2d r_du{0.5, 0.5};
  double q_gap{1e-4};       // per neighbor
  double q_rel_speed{0.5};  // per neighbor
};

struct MpcBounds
{
  double a_max{1.0};
  double a_min{-1.0};
  double delta_max{0.5};
  double ddelta_max{0.05};  // [rad/step]
  double da_max{0.5};       // [m/s^2 per step]
  double v_max{40.0};
  double v_min{0.0};
};

struct HorizonPlan
{
  int steps{10};
  double dt{0.1};
};

struct MpcConfig
{
  SpacingPolicy policy{};
  MpcWeights weights{};
  MpcBounds bounds{};
  HorizonPlan horizon{};
  double vehicle_length{kVehicleLength};
};

/// Bumper-to-bumper measurement of the predecessor.
struct RelativeState
{
  double gap{0.0};        // [m]
  double rel_speed{0.0};  // v_pred - v_ego [m/s]
};

/// Latest knowledge of a preceding vehicle, extrapolated over the horizon.
/// `hops` is the number of string positions between it and the ego vehicle.
struct NeighborPrediction
{
  int hops{1};
  double x{0.0};  // reference-point position at the current step [m]
  double v{0.0};  // [m/s]
  double a{0.0};  // extrapolation acceleration; zero for the constant-speed hold

  double x_at(double t) const { return x + v * t + 0.5 * a * t * t; }
  double v_at(double t) const { return v + a * t; }
};

/// Predecessor prediction built from a radar measurement of the ego's leader.
NeighborPrediction radar_neighbor(
  const VehicleState & ego, const RelativeState & radar, double vehicle_length);

/// Desired bumper-to-bumper gap to a neighbor `hops` positions ahead.
double desired_gap(const SpacingPolicy & policy, double v_ego, int hops);

/// Condensed QP over the stacked inputs [a_0, delta_0, ..., a_{T-1}, delta_{T-1}].
/// The neighbor with hops == 1 is the radar predecessor and carries the
/// collision constraint.
QpProblem build_problem(
  const MpcConfig & config, const VehicleState & ego, const ControlInput & prev_input,
  std::span<const NeighborPrediction> neighbors);

struct ControlResult
{
  ControlInput input{};
  QpStatus status{QpStatus::kOptimal};
  bool fallback{false};  // maximal braking applied because the QP was infeasible
  int iterations{0};
  double kkt_residual{0.0};
};

ControlResult compute_control(
  const MpcConfig & config, const VehicleState & ego, const ControlInput & prev_input,
  std::span<const NeighborPrediction> neighbors, const QpSettings & settings = {});

}  // namespace platoon

#endif  // PLATOON__MPC_CONTROLLER_HPP_
