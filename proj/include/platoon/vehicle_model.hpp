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

#ifndef PLATOON__VEHICLE_MODEL_HPP_
#define PLATOON__VEHICLE_MODEL_HPP_

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace platoon
{

/// Default bumper-to-bumper vehicle length [m]; also the kinematic wheelbase.
inline constexpr double kVehicleLength = 4.5;

/// Raised for non-finite states/inputs and singular linearization points.
class ModelError : public std::domain_error
{
public:
  explicit ModelError(const std::string & what) : std::domain_error(what) {}
};

/// Kinematic bicycle state. Vector form uses the ordering [x, y, v, phi].
struct VehicleState
{
  double x{0.0};    // longitudinal position [m]
  double y{0.0};    // lateral position [m]
  double v{0.0};    // speed [m/s]
  double phi{0.0};  // yaw angle [rad]

  Eigen::Vector4d to_vector() const { return {x, y, v, phi}; }
  static VehicleState from_vector(const Eigen::Vector4d & z) { return {z(0), z(1), z(2), z(3)}; }
};

struct ControlInput
{
  double a{0.0};      // acceleration [m/s^2]
  double delta{0.0};  // steering angle [rad]

  Eigen::Vector2d to_vector() const { return {a, delta}; }
  static ControlInput from_vector(const Eigen::Vector2d & u) { return {u(0), u(1)}; }
};

/// Indices into the state vector.
enum StateIndex : int { kX = 0, kY = 1, kV = 2, kPhi = 3 };
enum InputIndex : int { kAccel = 0, kSteer = 1 };

struct OperatingPoint
{
  double v{0.0};
  double phi{0.0};
  double delta{0.0};
};

/// Discrete affine model z' = A z + B u + C about an operating point.
struct LinearModel
{
  Eigen::Matrix4d A{Eigen::Matrix4d::Identity()};
  Eigen::Matrix<double, 4, 2> B{Eigen::Matrix<double, 4, 2>::Zero()};
  Eigen::Vector4d C{Eigen::Vector4d::Zero()};
  OperatingPoint op_point{};
  double dt{0.1};
};

/// Forward-Euler step of the kinematic bicycle. Speed is clamped at zero.
VehicleState step_nonlinear(
  const VehicleState & state, const ControlInput & input, double dt,
  double length = kVehicleLength);

/// Jacobians of the Euler step at (v, phi, delta). C is the first-order Taylor
/// residual, so the model is exact at the expansion point.
LinearModel linearize(const OperatingPoint & op_point, double dt, double length = kVehicleLength);

VehicleState step_linear(
  const LinearModel & model, const VehicleState & state, const ControlInput & input);

}  // namespace platoon

#endif  // PLATOON__VEHICLE_MODEL_HPP_
