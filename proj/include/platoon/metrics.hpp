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

#ifndef PLATOON__METRICS_HPP_
#define PLATOON__METRICS_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "platoon/sim_engine.hpp"

namespace platoon
{

/// CACC time-gap errors are dropped below this ego speed [m/s].
inline constexpr double kMinSpeedForTimeGap = 0.1;
/// Upstream peak deviations below this floor leave a ratio undefined [m/s].
inline constexpr double kAmplificationFloor = 0.01;
/// Speed band for settle times [m/s].
inline constexpr double kSettleBand = 0.1;

/// errors[i][k] for vehicle i at step k; row 0 (leader) is empty. Entries are
/// NaN where the error is undefined (time gap at near-zero speed).
/// CACC: |gap / v - t_gap| [s]. ACC and Platooning: |gap - desired| [m].
std::vector<std::vector<double>> gap_error_series(const SimTrace & trace, ControlMode mode);

/// Unit of the gap error for a mode: "s" or "m".
std::string error_unit(ControlMode mode);

/// Nearest-rank percentile: element ceil(q * n) (1-based) of the sorted values.
double percentile(std::span<const double> values, double q);
double percentile95(std::span<const double> values);

struct SpeedDifference
{
  std::vector<double> per_step;  // max minus min speed over the string
  double mean{0.0};
  double max{0.0};
};

SpeedDifference speed_difference(const SimTrace & trace);

struct AmplificationRatio
{
  int vehicle{0};  // i >= 2; ratio compares vehicle i with i - 1
  std::optional<double> ratio;
};

/// Peak |v_i - baseline| over [t_begin, t_end) divided by the same for i - 1.
std::vector<AmplificationRatio> string_stability_ratio(
  const SimTrace & trace, double baseline, double t_begin, double t_end);

struct SettleResult
{
  double seconds{0.0};
  bool settled{true};
};

/// Time from the start of `event` until every vehicle stays within
/// `band` of the new setpoint for the rest of the event window.
SettleResult settle_time(const SimTrace & trace, const LeaderEvent & event, double band = kSettleBand);

/// First time (from t_begin) at which each vehicle's speed deviates from its
/// value at t_begin by at least `threshold`; NaN if it never does.
std::vector<double> onset_times(const SimTrace & trace, double t_begin, double threshold = kSettleBand);

struct MetricsReport
{
  ControlMode mode{ControlMode::kCacc};
  int n_vehicles{0};
  double per{0.0};
  std::uint64_t seed{0};
  double p95_error{0.0};
  std::string error_unit;
  double mean_speed_diff{0.0};
  double max_speed_diff{0.0};
  std::vector<double> per_vehicle_p95;  // followers 1..N-1
  std::vector<AmplificationRatio> amplification_ratios;
  std::optional<double> max_amplification;
  std::vector<SettleResult> settle_times;  // one per leader event
  int infeasible_events{0};
};

/// Amplification windows: each leader event (baseline = pre-event speed);
/// without events the whole run against the leader's initial speed.
MetricsReport evaluate(const SimTrace & trace);

}  // namespace platoon

#endif  // PLATOON__METRICS_HPP_
