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

#ifndef PLATOON__COMMS_HPP_
#define PLATOON__COMMS_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "platoon/mpc_controller.hpp"
#include "platoon/vehicle_model.hpp"

namespace platoon
{

/// Basic safety message broadcast once per beacon period.
struct Bsm
{
  int sender_id{0};
  double t{0.0};
  double x{0.0};
  double y{0.0};
  double v{0.0};
  double a{0.0};
  double phi{0.0};
};

Bsm make_bsm(int sender_id, double t, const VehicleState & state, double accel);

struct ChannelConfig
{
  double per{0.0};  // packet error rate, probability in [0, 1]
  std::uint64_t seed{1};
};

struct Link
{
  int sender{0};
  int receiver{0};
};

/// Bernoulli erasure channel. The draw is a pure function of
/// (seed, step, sender, receiver), so links and steps are independent and
/// any draw can be reproduced in isolation.
bool transmit(const ChannelConfig & cfg, std::uint64_t step, const Link & link);

/// The uniform variate behind transmit(); delivered iff it is >= per.
double channel_uniform(std::uint64_t seed, std::uint64_t step, const Link & link);

enum class HoldModel { kConstantSpeed, kConstantAcceleration };

/// Receiver-side view of one neighbor, extrapolated across lost beacons.
struct NeighborEstimate
{
  Bsm last_bsm{};
  double age{0.0};
  double est_x{0.0};
  double est_v{0.0};

  static NeighborEstimate from_bsm(const Bsm & bsm);
  NeighborPrediction as_prediction(int hops, HoldModel hold) const;
};

/// Fresh packet replaces the estimate; otherwise the hold rule advances it by dt.
NeighborEstimate update_estimate(
  const NeighborEstimate & est, const std::optional<Bsm> & incoming, double dt,
  HoldModel hold = HoldModel::kConstantSpeed);

enum class TopologyKind { kAplf };

struct Topology
{
  TopologyKind kind{TopologyKind::kAplf};
  int n{2};
};

/// V2V senders heard by vehicle i: every preceding vehicle under APLF.
std::vector<int> v2v_neighbors(const Topology & topology, int i);

/// Lossless, noiseless radar on the immediate predecessor.
RelativeState radar_measure(
  const VehicleState & ego, const VehicleState & predecessor, double vehicle_length = kVehicleLength);

}  // namespace platoon

#endif  // PLATOON__COMMS_HPP_
