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


// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit status is nonzero when
// any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "platoon/comms.hpp"
#include "platoon/metrics.hpp"
#include "platoon/mpc_controller.hpp"
#include "platoon/qp_solver.hpp"
#include "platoon/sim_engine.hpp"
#include "platoon/vehicle_model.hpp"
#include "test_support.hpp"

using namespace platoon;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int precision = 3)
{
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

struct Verdict
{
  bool pass{true};
  std::vector<std::string> notes;

  void check(bool ok, const std::string & what)
  {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "VIOLATED ") + what);
  }
  void note(const std::string & what) { notes.push_back(what); }
};

int g_failures = 0;

void report(int id, const std::string & name, const Verdict & v, double runtime, double budget)
{
  Verdict out = v;
  out.check(runtime < budget, "runtime " + fmt(runtime, 3) + " s < " + fmt(budget, 4) + " s");
  std::printf("[%s] %d. %s\n", out.pass ? "PASS" : "FAIL", id, name.c_str());
  for (const auto & n : out.notes) std::printf("         %s\n", n.c_str());
  std::fflush(stdout);
  if (!out.pass) ++g_failures;
}

constexpr ControlMode kModes[] = {ControlMode::kAcc, ControlMode::kCacc, ControlMode::kPlatooning};

// Safety statistics gathered from a trace.
struct Safety
{
  double min_gap{std::numeric_limits<double>::infinity()};
  double max_abs_accel{0.0};
};

Safety safety_of(const SimTrace & tr)
{
  Safety s;
  for (const auto & st : tr.steps) {
    for (const auto & v : st.vehicles) {
      if (!v.is_leader) s.min_gap = std::min(s.min_gap, v.gap);
      s.max_abs_accel = std::max(s.max_abs_accel, std::abs(v.input.a));
    }
  }
  return s;
}

struct SafetyLedger
{
  std::mutex mu;
  int runs{0};
  int collisions{0};
  double min_gap{std::numeric_limits<double>::infinity()};
  double max_abs_accel{0.0};

  void add(const Safety & s)
  {
    std::lock_guard<std::mutex> lock(mu);
    ++runs;
    min_gap = std::min(min_gap, s.min_gap);
    max_abs_accel = std::max(max_abs_accel, s.max_abs_accel);
  }
  void add_collision()
  {
    std::lock_guard<std::mutex> lock(mu);
    ++runs;
    ++collisions;
  }
};

SafetyLedger g_safety;

ScenarioConfig step_test(ControlMode mode)
{
  ScenarioConfig c;  // 15 vehicles, 20 -> 15 -> 25 m/s, 120 s, lossless
  c.mode = mode;
  c.n_vehicles = 15;
  c.per = 0.0;
  c.duration = 120.0;
  c.leader.kind = LeaderProfileKind::kStepTest;
  return c;
}

// ---------------------------------------------------------------------------
// Criteria 1-3 share the lossless step-test runs.

struct StepRuns
{
  std::map<ControlMode, SimTrace> traces;
  double runtime{0.0};
};

StepRuns run_step_tests()
{
  StepRuns r;
  const auto t0 = Clock::now();
  for (ControlMode m : kModes) {
    SimTrace tr = run(step_test(m));
    g_safety.add(safety_of(tr));
    r.traces.emplace(m, std::move(tr));
  }
  r.runtime = seconds_since(t0);
  return r;
}

void criterion_1(const StepRuns & runs)
{
  Verdict v;
  std::map<ControlMode, std::vector<SettleResult>> settle;
  for (ControlMode m : kModes) {
    const SimTrace & tr = runs.traces.at(m);
    for (const auto & ev : leader_events(tr.config.leader, tr.config.duration)) {
      settle[m].push_back(settle_time(tr, ev));
    }
    v.check(settle[m].size() == 2, std::string(to_string(m)) + " has two leader events");
  }
  if (!v.pass) {
    report(1, "response-time ordering (15-vehicle step test)", v, runs.runtime, 60.0);
    return;
  }
  auto describe = [](const SettleResult & s) { return fmt(s.seconds) + " s" + (s.settled ? "" : " (not settled)"); };
  for (ControlMode m : kModes) {
    v.note(std::string(to_string(m)) + ": decel " + describe(settle[m][0]) + ", accel " + describe(settle[m][1]));
  }
  const double acc = settle[ControlMode::kAcc][0].seconds;
  for (ControlMode m : {ControlMode::kCacc, ControlMode::kPlatooning}) {
    const std::string name(to_string(m));
    v.check(acc >= 1.3 * settle[m][0].seconds,
            "ACC decel settle >= 1.3 x " + name + " (" + fmt(acc) + " vs " + fmt(1.3 * settle[m][0].seconds) + ")");
    v.check(settle[m][0].settled && settle[m][0].seconds < 12.0, name + " decel settle < 12 s");
    v.check(settle[m][1].settled && settle[m][1].seconds < 15.0, name + " accel settle < 15 s");
  }
  report(1, "response-time ordering (15-vehicle step test)", v, runs.runtime, 60.0);
}

void criterion_2(const StepRuns & runs)
{
  const auto t0 = Clock::now();
  Verdict v;
  const double t_begin = runs.traces.at(ControlMode::kAcc).config.leader.t_decel;
  auto spread = [](const std::vector<double> & on) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 1; i < on.size(); ++i) {
      lo = std::min(lo, on[i]);
      hi = std::max(hi, on[i]);
    }
    return hi - lo;
  };

  const std::vector<double> acc = onset_times(runs.traces.at(ControlMode::kAcc), t_begin);
  bool increasing = true;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (std::isnan(acc[i]) || (i > 0 && !(acc[i] > acc[i - 1]))) increasing = false;
  }
  std::string list;
  for (double o : acc) list += fmt(o) + " ";
  v.check(increasing, "ACC onset times strictly increasing: " + list);
  const double acc_spread = spread(acc);
  for (ControlMode m : {ControlMode::kCacc, ControlMode::kPlatooning}) {
    const std::vector<double> on = onset_times(runs.traces.at(m), t_begin);
    const bool defined = std::none_of(on.begin() + 1, on.end(), [](double x) { return std::isnan(x); });
    const double s = spread(on);
    v.check(defined && s <= 0.5 * acc_spread,
            std::string(to_string(m)) + " onset spread " + fmt(s) + " s <= half of ACC spread " + fmt(acc_spread) + " s");
  }
  report(2, "delay accumulation (onset times)", v, runs.runtime + seconds_since(t0), 60.0);
}

void criterion_3(const StepRuns & runs)
{
  const auto t0 = Clock::now();
  Verdict v;
  const MetricsReport cacc = evaluate(runs.traces.at(ControlMode::kCacc));
  const MetricsReport acc = evaluate(runs.traces.at(ControlMode::kAcc));
  double cacc_max = 0.0;
  bool all_defined = true;
  for (const auto & r : cacc.amplification_ratios) {
    if (!r.ratio) {
      all_defined = false;
      continue;
    }
    cacc_max = std::max(cacc_max, *r.ratio);
  }
  v.check(all_defined, "CACC ratio defined for every vehicle i >= 2");
  v.check(cacc_max <= 1.02, "CACC max amplification ratio " + fmt(cacc_max, 6) + " <= 1.02");

  const double acc_max = acc.max_amplification.value_or(0.0);
  if (acc_max > 1.0) {
    v.check(true, "ACC exhibits a ratio > 1 (max " + fmt(acc_max, 6) + ")");
  } else {
    v.note("ACC with these weights is also string stable (max ratio " + fmt(acc_max, 6) +
           "); checking CACC <= ACC per vehicle instead");
    int worse = 0;
    std::string where;
    for (std::size_t k = 0; k < cacc.amplification_ratios.size(); ++k) {
      const auto & c = cacc.amplification_ratios[k].ratio;
      const auto & a = acc.amplification_ratios[k].ratio;
      if (!c || !a) continue;
      if (*c > *a) {
        ++worse;
        where += " " + std::to_string(cacc.amplification_ratios[k].vehicle) + " (" + fmt(*c, 6) + " > " + fmt(*a, 6) + ")";
      }
    }
    v.check(worse == 0, "CACC ratio <= ACC ratio for every vehicle" + (worse ? ":" + where : std::string()));
  }
  report(3, "string stability (peak-deviation amplification)", v, runs.runtime + seconds_since(t0), 60.0);
}

// ---------------------------------------------------------------------------
// Criteria 4-5: sinusoidal leader sweep.

struct CellKey
{
  ControlMode mode;
  int n;
  double per;
  auto operator<=>(const CellKey &) const = default;
};

struct SweepResult
{
  std::map<CellKey, std::vector<double>> speed_diff;  // per seed
  int failures{0};
  double runtime{0.0};
};

SweepResult run_grid(const std::vector<ControlMode> & modes, const std::vector<int> & lengths,
                     const std::vector<double> & pers, int seeds)
{
  struct Job
  {
    CellKey key;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (ControlMode m : modes) {
    for (int n : lengths) {
      for (double p : pers) {
        for (int s = 1; s <= seeds; ++s) jobs.push_back({{m, n, p}, static_cast<std::uint64_t>(s)});
      }
    }
  }
  std::vector<double> values(jobs.size(), std::numeric_limits<double>::quiet_NaN());
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  const auto t0 = Clock::now();
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      ScenarioConfig c;
      c.mode = jobs[k].key.mode;
      c.n_vehicles = jobs[k].key.n;
      c.per = jobs[k].key.per;
      c.seed = jobs[k].seed;
      c.duration = 300.0;
      c.leader.kind = LeaderProfileKind::kSinusoid;
      try {
        const SimTrace tr = run(c);
        g_safety.add(safety_of(tr));
        values[k] = speed_difference(tr).mean;
      } catch (const CollisionError &) {
        g_safety.add_collision();
        ++failures;
      }
    }
  };
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto & t : pool) t.join();

  SweepResult r;
  r.runtime = seconds_since(t0);
  r.failures = failures;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (!std::isnan(values[k])) r.speed_diff[jobs[k].key].push_back(values[k]);
  }
  return r;
}

double mean_of(const std::vector<double> & v)
{
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const std::vector<int> kLengths{5, 15, 25};
const std::vector<double> kPers{0.0, 0.3, 0.6};
constexpr int kSeeds = 5;

void criterion_4(const SweepResult & sweep)
{
  Verdict v;
  v.check(sweep.failures == 0, "every cell completed (" + std::to_string(sweep.failures) + " failed)");
  auto cell = [&](ControlMode m, int n, double p) { return mean_of(sweep.speed_diff.at({m, n, p})); };
  for (ControlMode m : {ControlMode::kCacc, ControlMode::kPlatooning}) {
    const std::string name(to_string(m));
    for (int n : kLengths) {
      std::string row = name + " N=" + std::to_string(n) + ":";
      for (double p : kPers) row += " per " + fmt(p) + " -> " + fmt(cell(m, n, p), 4);
      v.note(row);
    }
    int violations = 0;
    std::string where;
    for (int n : kLengths) {
      for (std::size_t k = 1; k < kPers.size(); ++k) {
        const double lo = cell(m, n, kPers[k - 1]);
        const double hi = cell(m, n, kPers[k]);
        if (!(hi >= lo - 0.05 * lo)) {
          ++violations;
          where += " N=" + std::to_string(n) + " per " + fmt(kPers[k - 1]) + "->" + fmt(kPers[k]);
        }
      }
    }
    v.check(violations == 0, name + " non-decreasing in PER (5% tolerance)" + where);
    violations = 0;
    where.clear();
    for (double p : kPers) {
      for (std::size_t k = 1; k < kLengths.size(); ++k) {
        const double lo = cell(m, kLengths[k - 1], p);
        const double hi = cell(m, kLengths[k], p);
        if (!(hi >= lo - 0.05 * lo)) {
          ++violations;
          where += " per " + fmt(p) + " N=" + std::to_string(kLengths[k - 1]) + "->" + std::to_string(kLengths[k]);
        }
      }
    }
    v.check(violations == 0, name + " non-decreasing in N (5% tolerance)" + where);
  }
  const double plat = cell(ControlMode::kPlatooning, 25, 0.6);
  const double cacc = cell(ControlMode::kCacc, 25, 0.6);
  v.check(plat > cacc, "N=25, PER=0.6: Platooning " + fmt(plat, 4) + " m/s > CACC " + fmt(cacc, 4) +
                         " m/s");
  report(4, "mean speed difference trends (CACC/Platooning sweep)", v, sweep.runtime, 20 * 60.0);
}

void criterion_5(const SweepResult & coop, const SweepResult & acc)
{
  Verdict v;
  v.check(acc.failures == 0, "every ACC cell completed");
  for (int n : kLengths) {
    const double a = mean_of(acc.speed_diff.at({ControlMode::kAcc, n, 0.6}));
    const double c = mean_of(coop.speed_diff.at({ControlMode::kCacc, n, 0.6}));
    const double p = mean_of(coop.speed_diff.at({ControlMode::kPlatooning, n, 0.6}));
    v.check(a > c && a > p, "N=" + std::to_string(n) + ", PER=0.6: ACC " + fmt(a, 4) + " > CACC " + fmt(c, 4) +
                              " and Platooning " + fmt(p, 4) + " m/s");
  }
  report(5, "ACC versus cooperative modes at PER=0.6", v, acc.runtime, 5 * 60.0);
}

void criterion_6()
{
  Verdict v;
  v.note(std::to_string(g_safety.runs) + " runs from criteria 1-5");
  v.check(g_safety.collisions == 0, "no collisions (" + std::to_string(g_safety.collisions) + ")");
  v.check(g_safety.min_gap > 0.0, "smallest bumper-to-bumper gap " + fmt(g_safety.min_gap, 4) + " m > 0");
  v.check(g_safety.max_abs_accel <= 1.0 + 1e-9,
          "largest applied |a| " + fmt(g_safety.max_abs_accel, 6) + " m/s^2 <= 1 + 1e-9");
  report(6, "safety invariant", v, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

void criterion_7(const StepRuns & runs)
{
  const auto t0 = Clock::now();
  Verdict v;
  std::mt19937_64 rng(20260);
  double worst_oracle = 0.0;
  for (int k = 0; k < 20; ++k) {
    const QpProblem p = test::random_box_qp(rng, 5);
    const auto oracle = test::enumerate_active_sets(p);
    const QpSolution s = solve(p);
    if (!oracle || s.status != QpStatus::kOptimal) {
      worst_oracle = std::numeric_limits<double>::infinity();
      continue;
    }
    worst_oracle = std::max(worst_oracle, (s.x - *oracle).cwiseAbs().maxCoeff());
  }
  v.check(worst_oracle <= 1e-6, "20 random box QPs: max |x - x_oracle| = " + fmt(worst_oracle, 3) + " <= 1e-6");

  // MPC problems rebuilt from the lossless step-test traces: with no packet
  // loss every estimate equals the neighbor's true state at the same step.
  int sampled = 0, non_optimal = 0;
  double worst_kkt = 0.0, worst_replay = 0.0;
  for (const auto & [mode, tr] : runs.traces) {
    const MpcConfig cfg = tr.config.mpc_config();
    const double L = tr.config.vehicle_length;
    for (std::size_t k = 0; k < tr.steps.size(); k += 5) {
      const auto & vs = tr.steps[k].vehicles;
      for (int i = 1; i < tr.num_vehicles(); ++i) {
        std::vector<NeighborPrediction> nbs{radar_neighbor(vs[i].state, radar_measure(vs[i].state, vs[i - 1].state, L), L)};
        if (mode != ControlMode::kAcc) {
          for (int j = 0; j + 1 < i; ++j) nbs.push_back({i - j, vs[j].state.x, vs[j].state.v, 0.0});
        }
        const ControlInput prev = k == 0 ? ControlInput{} : tr.steps[k - 1].vehicles[i].input;
        const QpProblem p = build_problem(cfg, vs[i].state, prev, nbs);
        const QpSolution s = solve(p, tr.config.qp);
        ++sampled;
        if (s.status != QpStatus::kOptimal) {
          ++non_optimal;
          continue;
        }
        worst_kkt = std::max(worst_kkt, test::independent_kkt_residual(p, s.x));
        worst_replay = std::max({worst_replay, std::abs(s.x(0) - vs[i].input.a), std::abs(s.x(1) - vs[i].input.delta)});
      }
    }
  }
  v.check(non_optimal == 0, std::to_string(sampled) + " MPC problems sampled, " + std::to_string(non_optimal) +
                              " not solved to optimality");
  v.check(worst_kkt <= 1e-6, "max KKT residual (least-squares multipliers) " + fmt(worst_kkt, 3) + " <= 1e-6");
  v.note("rebuilt problems reproduce the logged inputs within " + fmt(worst_replay, 3));
  report(7, "QP solver oracle equivalence", v, seconds_since(t0), 10.0);
}

void criterion_8()
{
  const auto t0 = Clock::now();
  Verdict v;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> speed(0.0, 30.0);
  std::uniform_real_distribution<double> heading(-3.14159, 3.14159);
  std::uniform_real_distribution<double> steer(-0.4, 0.4);
  std::uniform_real_distribution<double> accel(0.5, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const OperatingPoint op{speed(rng), heading(rng), steer(rng)};
    const LinearModel m = linearize(op, 0.1);
    const auto [A, B] = test::central_jacobian(op, {accel(rng), op.delta}, 0.1);
    worst = std::max({worst, (m.A - A).cwiseAbs().maxCoeff(), (m.B - B).cwiseAbs().maxCoeff()});
  }
  v.check(worst <= 1e-6, "100 operating points: max |Jacobian - finite difference| " + fmt(worst, 3) + " <= 1e-6");
  const std::vector<double> orders = test::linearization_orders();
  for (double p : orders) v.check(p >= 1.8, "observed order " + fmt(p, 4) + " >= 1.8");
  report(8, "linearization correctness", v, seconds_since(t0), 5.0);
}

void criterion_9()
{
  const auto t0 = Clock::now();
  Verdict v;
  const int draws = 100000;
  const double dt = 0.1;
  for (double per : {0.2, 0.4, 0.6}) {
    int delivered = 0;
    int first = -1, last = -1;
    for (int k = 0; k < draws; ++k) {
      if (!transmit({per, 2026}, static_cast<std::uint64_t>(k), {0, 1})) continue;
      ++delivered;
      if (first < 0) first = k;
      last = k;
    }
    const double p = 1.0 - per;
    const double frac = static_cast<double>(delivered) / draws;
    const double se = std::sqrt(p * (1.0 - p) / draws);
    v.check(std::abs(frac - p) <= 3.0 * se, "PER " + fmt(per) + ": delivered " + fmt(frac, 5) + " vs " + fmt(p, 5) +
                                               " (" + fmt(std::abs(frac - p) / se, 3) + " standard errors)");
    const double gap = (last - first) * dt / (delivered - 1);
    const double expected = dt / p;
    v.check(std::abs(gap - expected) <= 0.05 * expected,
            "PER " + fmt(per) + ": mean inter-packet gap " + fmt(gap, 5) + " s vs " + fmt(expected, 5) + " s");
  }
  report(9, "channel statistics", v, seconds_since(t0), 5.0);
}

void criterion_10()
{
  const auto t0 = Clock::now();
  Verdict v;
  for (ControlMode m : kModes) {
    for (double per : {0.0, 0.6}) {
      ScenarioConfig c;
      c.mode = m;
      c.n_vehicles = 10;
      c.per = per;
      c.seed = 7;
      c.duration = 100.0;
      c.leader.kind = LeaderProfileKind::kConstant;
      c.leader.v_initial = 20.0;
      const SimTrace tr = run(c);
      double worst = 0.0;
      for (const auto & series : gap_error_series(tr, m)) {
        for (double e : series) {
          if (!std::isnan(e)) worst = std::max(worst, e);
        }
      }
      v.check(worst <= 1e-3, std::string(to_string(m)) + " per " + fmt(per) + ": max gap error " + fmt(worst, 3) +
                               " " + error_unit(m) + " <= 1e-3");
    }
  }
  report(10, "equilibrium fixed point", v, seconds_since(t0), 120.0);
}

}  // namespace

int main()
{
  std::printf("platoon_mpc acceptance suite\n");
  std::fflush(stdout);
  criterion_8();
  criterion_9();
  const StepRuns step = run_step_tests();
  criterion_1(step);
  criterion_2(step);
  criterion_3(step);
  criterion_7(step);
  criterion_10();
  const SweepResult coop = run_grid({ControlMode::kCacc, ControlMode::kPlatooning}, kLengths, kPers, kSeeds);
  criterion_4(coop);
  const SweepResult acc = run_grid({ControlMode::kAcc}, kLengths, {0.6}, kSeeds);
  criterion_5(coop, acc);
  criterion_6();
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
