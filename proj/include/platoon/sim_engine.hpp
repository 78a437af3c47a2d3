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

#ifndef PLATOON__SIM_ENGINE_HPP_
#define PLATOON__SIM_ENGINE_HPP_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/comms.hpp"
#include "platoon/mpc_controller.hpp"
#include "platoon/qp_solver.hpp"
#include "platoon/vehicle_model.hpp"

namespace platoon
{

enum class LeaderProfileKind { kConstant, kStepTest, kSinusoid };

std::string_view to_string(LeaderProfileKind kind);

/// Reference speed of the lead vehicle.
///  - constant: v_initial forever
///  - step test: v_initial, ramp to v_low at t_decel, hold, ramp to v_high at t_accel
///  - sinusoid: mean (v_min + v_max) / 2, starting at v_min with zero acceleration
struct LeaderProfile
{
  LeaderProfileKind kind{LeaderProfileKind::kStepTest};
  double v_initial{20.0};
  double v_low{15.0};
  double v_high{25.0};
  double t_decel{10.0};
  double t_accel{50.0};
  double ramp_rate{1.0};  // [m/s^2]
  double v_min{10.0};
  double v_max{20.0};
  double period{60.0};
  double accel_limit{1.0};  // open-loop actuation bound [m/s^2]
};

double leader_speed(const LeaderProfile & profile, double t);

/// A leader speed change: ramp from t_start to t_complete, analysis window
/// until t_window_end.
struct LeaderEvent
{
  double t_start{0.0};
  double t_complete{0.0};
  double t_window_end{0.0};
  double v_from{0.0};
  double v_to{0.0};
};

std::vector<LeaderEvent> leader_events(const LeaderProfile & profile, double duration);

struct ScenarioConfig
{
  int n_vehicles{15};
  ControlMode mode{ControlMode::kCacc};
  double per{0.0};
  std::uint64_t seed{1};
  double duration{120.0};
  double dt{0.1};
  LeaderProfile leader{};
  SpacingPolicy policy{};  // policy.mode is overwritten by `mode`
  MpcWeights weights{};
  MpcBounds bounds{};
  HorizonPlan horizon{};
  double vehicle_length{kVehicleLength};
  HoldModel hold{HoldModel::kConstantSpeed};
  QpSettings qp{};

  MpcConfig mpc_config() const;
  int num_steps() const;
};

/// Field-level validation failure.
class ScenarioError : public std::invalid_argument
{
public:
  ScenarioError(std::string field, std::string message)
  : std::invalid_argument(field + ": " + message), field_(std::move(field)), message_(std::move(message))
  {
  }
  const std::string & field() const { return field_; }
  const std::string & message() const { return message_; }

private:
  std::string field_;
  std::string message_;
};

/// A bumper-to-bumper gap went negative; the run is aborted.
class CollisionError : public std::runtime_error
{
public:
  CollisionError(int step, int vehicle, double gap);
  int step() const { return step_; }
  int vehicle() const { return vehicle_; }
  double gap() const { return gap_; }

private:
  int step_;
  int vehicle_;
  double gap_;
};

void validate(const ScenarioConfig & config);

struct VehicleSample
{
  VehicleState state{};
  ControlInput input{};
  double gap{std::numeric_limits<double>::quiet_NaN()};  // leader: NaN
  double desired_gap{std::numeric_limits<double>::quiet_NaN()};
  QpStatus status{QpStatus::kOptimal};
  bool fallback{false};
  bool is_leader{false};
};

struct TraceStep
{
  int step{0};
  double t{0.0};
  std::vector<VehicleSample> vehicles;
  /// delivered[i][j]: BSM of vehicle j reached vehicle i at this step (j < i).
  std::vector<std::vector<std::uint8_t>> delivered;
  /// ages[i][j]: estimator age of neighbor j at vehicle i after the update.
  std::vector<std::vector<double>> ages;
};

struct SimTrace
{
  ScenarioConfig config{};
  std::vector<TraceStep> steps;
  int infeasible_events{0};

  int num_vehicles() const { return config.n_vehicles; }
  double speed(int step, int vehicle) const { return steps[step].vehicles[vehicle].state.v; }
};

struct InitialConditions
{
  std::vector<VehicleState> states;
  /// estimates[i][j] for j < i, bootstrapped from the true initial states.
  std::vector<std::vector<NeighborEstimate>> estimates;
};

InitialConditions initialize(const ScenarioConfig & config);

/// Synchronous fixed-step simulation. Throws CollisionError on a negative gap.
SimTrace run(const ScenarioConfig & config);

}  // namespace platoon

#endif  // PLATOON__SIM_ENGINE_HPP_
