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

#include "platoon/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace platoon
{
namespace
{

// Speed after ramping from `from` toward `to` at `rate` for `elapsed` seconds.
double ramp(double from, double to, double rate, double elapsed)
{
  if (elapsed <= 0.0) return from;
  const double travelled = rate * elapsed;
  return from < to ? std::min(to, from + travelled) : std::max(to, from - travelled);
}

}  // namespace

std::string_view to_string(LeaderProfileKind kind)
{
  switch (kind) {
    case LeaderProfileKind::kConstant:
      return "constant";
    case LeaderProfileKind::kStepTest:
      return "step";
    case LeaderProfileKind::kSinusoid:
      return "sinusoid";
  }
  return "unknown";
}

double leader_speed(const LeaderProfile & p, double t)
{
  switch (p.kind) {
    case LeaderProfileKind::kConstant:
      return p.v_initial;
    case LeaderProfileKind::kStepTest:
      if (t < p.t_accel) {
        return ramp(p.v_initial, p.v_low, p.ramp_rate, t - p.t_decel);
      }
      return ramp(p.v_low, p.v_high, p.ramp_rate, t - p.t_accel);
    case LeaderProfileKind::kSinusoid: {
      const double mid = 0.5 * (p.v_min + p.v_max);
      const double amp = 0.5 * (p.v_max - p.v_min);
      return mid - amp * std::cos(2.0 * std::numbers::pi * t / p.period);
    }
  }
  return p.v_initial;
}

std::vector<LeaderEvent> leader_events(const LeaderProfile & p, double duration)
{
  std::vector<LeaderEvent> events;
  if (p.kind != LeaderProfileKind::kStepTest) return events;

  const double decel_done = p.t_decel + std::abs(p.v_initial - p.v_low) / p.ramp_rate;
  const double accel_done = p.t_accel + std::abs(p.v_high - p.v_low) / p.ramp_rate;
  if (decel_done <= duration) {
    events.push_back({p.t_decel, decel_done, std::min(p.t_accel, duration), p.v_initial, p.v_low});
  }
  if (accel_done <= duration) {
    events.push_back({p.t_accel, accel_done, duration, p.v_low, p.v_high});
  }
  return events;
}

MpcConfig ScenarioConfig::mpc_config() const
{
  MpcConfig c;
  c.policy = policy;
  c.policy.mode = mode;
  c.weights = weights;
  c.bounds = bounds;
  c.horizon = horizon;
  c.horizon.dt = dt;
  c.vehicle_length = vehicle_length;
  return c;
}

int ScenarioConfig::num_steps() const { return static_cast<int>(std::lround(duration / dt)); }

CollisionError::CollisionError(int step, int vehicle, double gap)
: std::runtime_error([&] {
    std::ostringstream os;
    os << "collision at step " << step << ": vehicle " << vehicle << " gap " << gap << " m";
    return os.str();
  }()),
  step_(step),
  vehicle_(vehicle),
  gap_(gap)
{
}

void validate(const ScenarioConfig & c)
{
  if (c.n_vehicles < 2) throw ScenarioError("n_vehicles", "must be >= 2");
  if (!(c.per >= 0.0 && c.per <= 1.0)) throw ScenarioError("per", "must lie in [0, 1]");
  if (!(c.duration > 0.0)) throw ScenarioError("duration", "must be positive");
  if (!(c.dt > 0.0)) throw ScenarioError("dt", "must be positive");
  if (c.horizon.steps < 1) throw ScenarioError("horizon.steps", "must be >= 1");
  if (!(c.vehicle_length > 0.0)) throw ScenarioError("vehicle_length", "must be positive");
  if (c.mode != ControlMode::kPlatooning && !(c.policy.t_gap > 0.0)) {
    throw ScenarioError("policy.t_gap", "must be positive");
  }
  if (c.mode == ControlMode::kPlatooning && !(c.policy.d_const > 0.0)) {
    throw ScenarioError("policy.d_const", "must be positive");
  }
  if (c.policy.d_safety < 0.0) throw ScenarioError("policy.d_safety", "must be >= 0");

  const LeaderProfile & p = c.leader;
  if (!(p.accel_limit > 0.0)) throw ScenarioError("leader.accel_limit", "must be positive");
  switch (p.kind) {
    case LeaderProfileKind::kConstant:
      if (p.v_initial < 0.0) throw ScenarioError("leader.v_initial", "must be >= 0");
      break;
    case LeaderProfileKind::kStepTest:
      if (!(p.ramp_rate > 0.0)) throw ScenarioError("leader.ramp_rate", "must be positive");
      if (p.v_initial < 0.0 || p.v_low < 0.0 || p.v_high < 0.0) {
        throw ScenarioError("leader", "speeds must be >= 0");
      }
      if (p.t_decel < 0.0) throw ScenarioError("leader.t_decel", "must be >= 0");
      if (p.t_accel < p.t_decel + std::abs(p.v_initial - p.v_low) / p.ramp_rate) {
        throw ScenarioError("leader.t_accel", "must not start before the first ramp completes");
      }
      break;
    case LeaderProfileKind::kSinusoid:
      if (!(p.period > 0.0)) throw ScenarioError("leader.period", "must be positive");
      if (p.v_min < 0.0 || p.v_max < p.v_min) {
        throw ScenarioError("leader", "need 0 <= v_min <= v_max");
      }
      break;
  }

  try {
    (void)desired_gap(c.mpc_config().policy, 0.0, 1);
  } catch (const std::invalid_argument & e) {
    throw ScenarioError("policy", e.what());
  }
}

InitialConditions initialize(const ScenarioConfig & config)
{
  validate(config);
  const int n = config.n_vehicles;
  const double v0 = leader_speed(config.leader, 0.0);
  const MpcConfig mpc = config.mpc_config();
  const double spacing = config.vehicle_length + desired_gap(mpc.policy, v0, 1);

  InitialConditions ic;
  ic.states.resize(n);
  for (int i = 0; i < n; ++i) {
    ic.states[i] = {-i * spacing, 0.0, v0, 0.0};
  }
  ic.estimates.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      ic.estimates[i].push_back(NeighborEstimate::from_bsm(make_bsm(j, 0.0, ic.states[j], 0.0)));
    }
  }
  return ic;
}

SimTrace run(const ScenarioConfig & config)
{
  InitialConditions ic = initialize(config);
  const int n = config.n_vehicles;
  const int steps = config.num_steps();
  const double dt = config.dt;
  const double L = config.vehicle_length;
  const MpcConfig mpc = config.mpc_config();
  const ChannelConfig channel{config.per, config.seed};
  const Topology topology{TopologyKind::kAplf, n};

  SimTrace trace;
  trace.config = config;
  trace.steps.reserve(static_cast<std::size_t>(steps) + 1);

  std::vector<VehicleState> states = ic.states;
  auto & estimates = ic.estimates;
  std::vector<ControlInput> applied(n);
  std::vector<NeighborPrediction> neighbors;
  neighbors.reserve(static_cast<std::size_t>(n));

  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    TraceStep rec;
    rec.step = k;
    rec.t = t;
    rec.vehicles.resize(n);
    rec.delivered.resize(n);
    rec.ages.resize(n);

    for (int i = 1; i < n; ++i) {
      const double gap = states[i - 1].x - states[i].x - L;
      if (gap < 0.0) {
        throw CollisionError(k, i, gap);
      }
    }

    // (1) beacons carry the state at t and the last applied acceleration.
    std::vector<Bsm> beacons(n);
    for (int j = 0; j < n; ++j) {
      beacons[j] = make_bsm(j, t, states[j], applied[j].a);
    }

    // (2)+(3) channel draws and estimator updates. Step 0 is the bootstrap
    // reception of the true initial states.
    for (int i = 1; i < n; ++i) {
      const std::vector<int> senders = v2v_neighbors(topology, i);
      rec.delivered[i].resize(senders.size());
      rec.ages[i].resize(senders.size());
      for (int j : senders) {
        const bool ok = k == 0 || transmit(channel, static_cast<std::uint64_t>(k), {j, i});
        rec.delivered[i][j] = ok ? 1 : 0;
        if (k > 0) {
          estimates[i][j] = update_estimate(
            estimates[i][j], ok ? std::optional<Bsm>(beacons[j]) : std::nullopt, dt, config.hold);
        }
        rec.ages[i][j] = estimates[i][j].age;
      }
    }

    // (4) follower controls from the step-k snapshot.
    std::vector<ControlInput> next(n);
    for (int i = 1; i < n; ++i) {
      const RelativeState radar = radar_measure(states[i], states[i - 1], L);
      neighbors.clear();
      neighbors.push_back(radar_neighbor(states[i], radar, L));
      if (config.mode != ControlMode::kAcc) {
        for (int j = 0; j + 1 < i; ++j) {
          neighbors.push_back(estimates[i][j].as_prediction(i - j, config.hold));
        }
      }
      const ControlResult res = compute_control(mpc, states[i], applied[i], neighbors, config.qp);
      next[i] = res.input;
      if (res.fallback) ++trace.infeasible_events;

      VehicleSample & s = rec.vehicles[i];
      s.state = states[i];
      s.input = res.input;
      s.gap = radar.gap;
      s.desired_gap = desired_gap(mpc.policy, states[i].v, 1);
      s.status = res.status;
      s.fallback = res.fallback;
    }

    // (5) open-loop leader.
    {
      const double target = leader_speed(config.leader, t + dt);
      const double lim = config.leader.accel_limit;
      next[0] = {std::clamp((target - states[0].v) / dt, -lim, lim), 0.0};
      VehicleSample & s = rec.vehicles[0];
      s.state = states[0];
      s.input = next[0];
      s.is_leader = true;
    }

    trace.steps.push_back(std::move(rec));
    if (k == steps) break;

    // (6) plants.
    for (int i = 0; i < n; ++i) {
      states[i] = step_nonlinear(states[i], next[i], dt, L);
      applied[i] = next[i];
    }
  }
  return trace;
}

}  // namespace platoon
