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

#include "platoon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace platoon
{
namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Steps whose time lies in [t_begin, t_end), with a small allowance for
// accumulated rounding in k * dt.
bool in_window(double t, double t_begin, double t_end, double dt)
{
  const double eps = 1e-6 * dt;
  return t >= t_begin - eps && t < t_end - eps;
}

}  // namespace

std::vector<std::vector<double>> gap_error_series(const SimTrace & trace, ControlMode mode)
{
  if (trace.steps.empty()) {
    throw std::invalid_argument("gap_error_series: empty trace");
  }
  const int n = trace.num_vehicles();
  const double t_gap = trace.config.policy.t_gap;
  std::vector<std::vector<double>> out(n);
  for (int i = 1; i < n; ++i) {
    out[i].reserve(trace.steps.size());
    for (const auto & step : trace.steps) {
      const VehicleSample & s = step.vehicles[i];
      if (mode == ControlMode::kCacc) {
        out[i].push_back(
          s.state.v < kMinSpeedForTimeGap ? kNaN : std::abs(s.gap / s.state.v - t_gap));
      } else {
        out[i].push_back(std::abs(s.gap - s.desired_gap));
      }
    }
  }
  return out;
}

std::string error_unit(ControlMode mode) { return mode == ControlMode::kCacc ? "s" : "m"; }

double percentile(std::span<const double> values, double q)
{
  if (values.empty()) {
    throw std::invalid_argument("percentile: empty input");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

double percentile95(std::span<const double> values) { return percentile(values, 0.95); }

SpeedDifference speed_difference(const SimTrace & trace)
{
  SpeedDifference out;
  out.per_step.reserve(trace.steps.size());
  for (const auto & step : trace.steps) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto & s : step.vehicles) {
      lo = std::min(lo, s.state.v);
      hi = std::max(hi, s.state.v);
    }
    out.per_step.push_back(step.vehicles.empty() ? 0.0 : hi - lo);
  }
  if (!out.per_step.empty()) {
    double sum = 0.0;
    for (double d : out.per_step) sum += d;
    out.mean = sum / static_cast<double>(out.per_step.size());
    out.max = *std::max_element(out.per_step.begin(), out.per_step.end());
  }
  return out;
}

std::vector<AmplificationRatio> string_stability_ratio(
  const SimTrace & trace, double baseline, double t_begin, double t_end)
{
  const int n = trace.num_vehicles();
  std::vector<double> peak(n, 0.0);
  for (const auto & step : trace.steps) {
    if (!in_window(step.t, t_begin, t_end, trace.config.dt)) continue;
    for (int i = 0; i < n; ++i) {
      peak[i] = std::max(peak[i], std::abs(step.vehicles[i].state.v - baseline));
    }
  }
  std::vector<AmplificationRatio> out;
  for (int i = 2; i < n; ++i) {
    AmplificationRatio r{i, std::nullopt};
    if (peak[i - 1] >= kAmplificationFloor) {
      r.ratio = peak[i] / peak[i - 1];
    }
    out.push_back(r);
  }
  return out;
}

SettleResult settle_time(const SimTrace & trace, const LeaderEvent & event, double band)
{
  const double dt = trace.config.dt;
  double last_violation = -1.0;
  bool any = false;
  for (const auto & step : trace.steps) {
    if (!in_window(step.t, event.t_start, event.t_window_end, dt)) continue;
    for (const auto & s : step.vehicles) {
      if (std::abs(s.state.v - event.v_to) > band) {
        last_violation = step.t;
        any = true;
        break;
      }
    }
  }
  const double window = event.t_window_end - event.t_start;
  if (!any) return {0.0, true};
  const double settled_at = last_violation + dt - event.t_start;
  if (settled_at >= window - 1e-6 * dt) return {window, false};
  return {settled_at, true};
}

std::vector<double> onset_times(const SimTrace & trace, double t_begin, double threshold)
{
  const int n = trace.num_vehicles();
  std::vector<double> onset(n, kNaN);
  std::vector<double> initial(n, kNaN);
  const double dt = trace.config.dt;
  for (const auto & step : trace.steps) {
    if (step.t < t_begin - 1e-6 * dt) continue;
    for (int i = 0; i < n; ++i) {
      const double v = step.vehicles[i].state.v;
      if (std::isnan(initial[i])) initial[i] = v;
      if (std::isnan(onset[i]) && std::abs(v - initial[i]) >= threshold) {
        onset[i] = step.t - t_begin;
      }
    }
  }
  return onset;
}

MetricsReport evaluate(const SimTrace & trace)
{
  const ScenarioConfig & c = trace.config;
  MetricsReport r;
  r.mode = c.mode;
  r.n_vehicles = c.n_vehicles;
  r.per = c.per;
  r.seed = c.seed;
  r.error_unit = error_unit(c.mode);
  r.infeasible_events = trace.infeasible_events;

  const auto errors = gap_error_series(trace, c.mode);
  std::vector<double> pooled;
  for (int i = 1; i < c.n_vehicles; ++i) {
    std::vector<double> mine;
    for (double e : errors[i]) {
      if (!std::isnan(e)) mine.push_back(e);
    }
    r.per_vehicle_p95.push_back(mine.empty() ? kNaN : percentile95(mine));
    pooled.insert(pooled.end(), mine.begin(), mine.end());
  }
  r.p95_error = pooled.empty() ? kNaN : percentile95(pooled);

  const SpeedDifference sd = speed_difference(trace);
  r.mean_speed_diff = sd.mean;
  r.max_speed_diff = sd.max;

  const double end_time = trace.steps.empty() ? 0.0 : trace.steps.back().t + c.dt;
  const auto events = leader_events(c.leader, c.duration);
  std::vector<std::pair<double, std::pair<double, double>>> windows;  // baseline, [begin, end)
  for (const auto & e : events) {
    windows.push_back({e.v_from, {e.t_start, std::max(e.t_window_end, e.t_complete)}});
    r.settle_times.push_back(settle_time(trace, e));
  }
  if (events.empty()) {
    windows.push_back({leader_speed(c.leader, 0.0), {0.0, end_time}});
  }

  for (int i = 2; i < c.n_vehicles; ++i) r.amplification_ratios.push_back({i, std::nullopt});
  for (const auto & [baseline, span] : windows) {
    const auto ratios = string_stability_ratio(trace, baseline, span.first, span.second);
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      if (!ratios[k].ratio) continue;
      auto & slot = r.amplification_ratios[k].ratio;
      slot = slot ? std::max(*slot, *ratios[k].ratio) : *ratios[k].ratio;
    }
  }
  for (const auto & a : r.amplification_ratios) {
    if (a.ratio) r.max_amplification = r.max_amplification ? std::max(*r.max_amplification, *a.ratio) : *a.ratio;
  }
  return r;
}

}  // namespace platoon
