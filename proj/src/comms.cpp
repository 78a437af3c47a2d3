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

#include "platoon/comms.hpp"

#include <stdexcept>

namespace platoon
{
namespace
{

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Bsm make_bsm(int sender_id, double t, const VehicleState & state, double accel)
{
  return {sender_id, t, state.x, state.y, state.v, accel, state.phi};
}

double channel_uniform(std::uint64_t seed, std::uint64_t step, const Link & link)
{
  std::uint64_t h = mix(seed);
  h = mix(h ^ step);
  h = mix(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(link.sender)));
  h = mix(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(link.receiver)) << 32));
  // 53 high bits -> [0, 1)
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

bool transmit(const ChannelConfig & cfg, std::uint64_t step, const Link & link)
{
  if (!(cfg.per >= 0.0 && cfg.per <= 1.0)) {
    throw std::invalid_argument("packet error rate must lie in [0, 1]");
  }
  return channel_uniform(cfg.seed, step, link) >= cfg.per;
}

NeighborEstimate NeighborEstimate::from_bsm(const Bsm & bsm)
{
  return {bsm, 0.0, bsm.x, bsm.v};
}

NeighborPrediction NeighborEstimate::as_prediction(int hops, HoldModel hold) const
{
  return {hops, est_x, est_v, hold == HoldModel::kConstantAcceleration ? last_bsm.a : 0.0};
}

NeighborEstimate update_estimate(
  const NeighborEstimate & est, const std::optional<Bsm> & incoming, double dt, HoldModel hold)
{
  if (!(dt > 0.0)) {
    throw std::invalid_argument("update_estimate: dt must be positive");
  }
  if (incoming) {
    return NeighborEstimate::from_bsm(*incoming);
  }
  NeighborEstimate next = est;
  next.age = est.age + dt;
  const Bsm & b = est.last_bsm;
  if (hold == HoldModel::kConstantAcceleration) {
    next.est_v = b.v + b.a * next.age;
    next.est_x = b.x + b.v * next.age + 0.5 * b.a * next.age * next.age;
  } else {
    next.est_v = b.v;
    next.est_x = b.x + b.v * next.age;
  }
  return next;
}

std::vector<int> v2v_neighbors(const Topology & topology, int i)
{
  if (i < 0 || i >= topology.n) {
    throw std::out_of_range("vehicle index outside the string");
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(i));
  for (int j = 0; j < i; ++j) out.push_back(j);
  return out;
}

RelativeState radar_measure(
  const VehicleState & ego, const VehicleState & predecessor, double vehicle_length)
{
  return {predecessor.x - ego.x - vehicle_length, predecessor.v - ego.v};
}

}  // namespace platoon
