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

#include "platoon/vehicle_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace platoon
{
namespace
{

bool finite(const VehicleState & s)
{
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.v) && std::isfinite(s.phi);
}

bool finite(const ControlInput & u) { return std::isfinite(u.a) && std::isfinite(u.delta); }

void check_steering(double delta)
{
  if (!(std::abs(delta) < std::numbers::pi / 2.0)) {
    throw ModelError("steering angle must satisfy |delta| < pi/2");
  }
}

// Euler step without the zero-speed clamp; the linearization is taken of this map.
Eigen::Vector4d euler(const Eigen::Vector4d & z, const Eigen::Vector2d & u, double dt, double length)
{
  const double v = z(kV);
  const double phi = z(kPhi);
  return {
    z(kX) + v * std::cos(phi) * dt,
    z(kY) + v * std::sin(phi) * dt,
    v + u(kAccel) * dt,
    phi + v * std::tan(u(kSteer)) / length * dt};
}

}  // namespace

VehicleState step_nonlinear(
  const VehicleState & state, const ControlInput & input, double dt, double length)
{
  if (!finite(state) || !finite(input)) {
    throw ModelError("non-finite state or input");
  }
  if (!(dt > 0.0)) {
    throw ModelError("dt must be positive");
  }
  check_steering(input.delta);

  VehicleState next = VehicleState::from_vector(
    euler(state.to_vector(), input.to_vector(), dt, length));
  next.v = std::max(0.0, next.v);
  return next;
}

LinearModel linearize(const OperatingPoint & op, double dt, double length)
{
  if (!std::isfinite(op.v) || !std::isfinite(op.phi) || !std::isfinite(op.delta)) {
    throw ModelError("non-finite operating point");
  }
  if (!(dt > 0.0)) {
    throw ModelError("dt must be positive");
  }
  if (!(std::abs(op.delta) < std::numbers::pi / 2.0)) {
    throw ModelError("singular linearization: |delta| must be < pi/2");
  }

  const double c_phi = std::cos(op.phi);
  const double s_phi = std::sin(op.phi);
  const double c_delta = std::cos(op.delta);

  LinearModel m;
  m.op_point = op;
  m.dt = dt;

  m.A.setIdentity();
  m.A(kX, kV) = c_phi * dt;
  m.A(kX, kPhi) = -op.v * s_phi * dt;
  m.A(kY, kV) = s_phi * dt;
  m.A(kY, kPhi) = op.v * c_phi * dt;
  m.A(kPhi, kV) = std::tan(op.delta) / length * dt;

  m.B.setZero();
  m.B(kV, kAccel) = dt;
  m.B(kPhi, kSteer) = op.v / (length * c_delta * c_delta) * dt;

  // Position does not enter the Jacobians, so the residual is independent of
  // (x, y); the acceleration cancels against B as well.
  const Eigen::Vector4d z_bar{0.0, 0.0, op.v, op.phi};
  const Eigen::Vector2d u_bar{0.0, op.delta};
  m.C = euler(z_bar, u_bar, dt, length) - m.A * z_bar - m.B * u_bar;
  return m;
}

VehicleState step_linear(
  const LinearModel & model, const VehicleState & state, const ControlInput & input)
{
  if (!finite(state) || !finite(input)) {
    throw ModelError("non-finite state or input");
  }
  return VehicleState::from_vector(
    model.A * state.to_vector() + model.B * input.to_vector() + model.C);
}

}  // namespace platoon
