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

#include "platoon/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace platoon
{
namespace fs = std::filesystem;

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Writer>
std::string render(Writer && write)
{
  std::ostringstream os;
  write(os);
  return os.str();
}

AggregateRow failed_row(const ScenarioConfig & c, const std::string & status, const std::string & what)
{
  AggregateRow r;
  r.mode = std::string(to_string(c.mode));
  r.n_vehicles = c.n_vehicles;
  r.per = c.per;
  r.seed = c.seed;
  r.status = status;
  r.mean_speed_diff = kNaN;
  r.max_speed_diff = kNaN;
  r.p95_error = kNaN;
  r.error_unit = error_unit(c.mode);
  r.max_amplification = kNaN;
  r.message = what;
  return r;
}

std::optional<AggregateRow> read_cell(const fs::path & path)
{
  if (!fs::exists(path)) return std::nullopt;
  try {
    const CsvTable table = read_csv_file(path);
    if (table.header != aggregate_header() || table.rows.size() != 1) return std::nullopt;
    return aggregate_from_cells(table, table.rows.front());
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

std::string cell_csv(const AggregateRow & row)
{
  CsvTable t;
  t.header = aggregate_header();
  t.rows.push_back(aggregate_cells(row));
  return render([&](std::ostream & os) { write_csv(os, t); });
}

// --- plot helpers ----------------------------------------------------------

struct Stats
{
  double mean{kNaN};
  double stddev{kNaN};
  int n{0};
};

Stats stats(const std::vector<double> & v)
{
  Stats s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / s.n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = s.n > 1 ? std::sqrt(ss / (s.n - 1)) : 0.0;
  return s;
}

struct SeriesSpec
{
  std::string label;
  std::string mode;
  std::optional<double> per;  // nullopt: lowest PER available at each length
};

int mode_rank(const std::string & mode)
{
  if (auto m = parse_control_mode(mode)) return static_cast<int>(*m);
  return 99;
}

std::string per_label(double per) { return "per=" + format_number(per); }

}  // namespace

MetricsReport run_scenario(const ScenarioConfig & config, const fs::path & out_dir)
{
  const SimTrace trace = run(config);
  const MetricsReport report = evaluate(trace);
  write_file_atomic(out_dir / "trace.csv", render([&](std::ostream & os) { write_trace_csv(os, trace); }));
  write_file_atomic(out_dir / "report.csv", render([&](std::ostream & os) { write_report_csv(os, report); }));
  write_file_atomic(
    out_dir / "vehicles.csv", render([&](std::ostream & os) { write_vehicle_report_csv(os, report); }));
  return report;
}

std::string cell_name(ControlMode mode, int n_vehicles, double per, std::uint64_t seed)
{
  return std::string(to_string(mode)) + "_n" + std::to_string(n_vehicles) + "_per" +
         format_number(per) + "_s" + std::to_string(seed);
}

AggregateRow run_cell(const ScenarioConfig & cell, const fs::path * trace_path)
{
  try {
    const SimTrace trace = run(cell);
    if (trace_path) {
      write_file_atomic(*trace_path, render([&](std::ostream & os) { write_trace_csv(os, trace); }));
    }
    return aggregate_from_report(evaluate(trace));
  } catch (const CollisionError & e) {
    return failed_row(cell, "collision", e.what());
  } catch (const std::exception & e) {
    return failed_row(cell, "error", e.what());
  }
}

SweepSummary run_sweep(const SweepSpec & spec, const fs::path & out_dir, int workers, std::ostream * progress)
{
  std::vector<ScenarioConfig> cells;
  for (ControlMode mode : spec.modes) {
    for (int n : spec.lengths) {
      for (double per : spec.pers) {
        for (std::uint64_t seed : spec.seeds) {
          cells.push_back(make_cell(spec, mode, n, per, seed));
          try {
            validate(cells.back());
          } catch (const ScenarioError & e) {
            throw ConfigError(cell_name(mode, n, per, seed) + ": " + e.field(), e.message());
          }
        }
      }
    }
  }

  const fs::path cell_dir = out_dir / "cells";
  const fs::path trace_dir = out_dir / "traces";
  fs::create_directories(cell_dir);
  if (spec.save_traces) fs::create_directories(trace_dir);

  SweepSummary summary;
  summary.rows.resize(cells.size());
  std::vector<std::size_t> pending;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const ScenarioConfig & c = cells[k];
    const std::string name = cell_name(c.mode, c.n_vehicles, c.per, c.seed);
    const bool trace_ok = !spec.save_traces || fs::exists(trace_dir / (name + ".csv"));
    if (auto row = read_cell(cell_dir / (name + ".csv")); row && trace_ok) {
      summary.rows[k] = *row;
      ++summary.reused;
    } else {
      pending.push_back(k);
    }
  }

  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<int> done{0};
  std::exception_ptr io_failure;
  auto worker = [&] {
    for (std::size_t p = next++; p < pending.size(); p = next++) {
      const ScenarioConfig & c = cells[pending[p]];
      const std::string name = cell_name(c.mode, c.n_vehicles, c.per, c.seed);
      const fs::path trace_path = trace_dir / (name + ".csv");
      try {
        AggregateRow row = run_cell(c, spec.save_traces ? &trace_path : nullptr);
        write_file_atomic(cell_dir / (name + ".csv"), cell_csv(row));
        summary.rows[pending[p]] = row;
        const int finished = ++done;
        if (progress) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *progress << "[" << finished << "/" << pending.size() << "] " << name << " " << row.status;
          if (row.status == "ok") *progress << " mean_speed_diff=" << format_number(row.mean_speed_diff);
          *progress << "\n";
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (!io_failure) io_failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp<int>(workers, 1, std::max<int>(1, static_cast<int>(pending.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto & th : pool) th.join();
  if (io_failure) std::rethrow_exception(io_failure);

  summary.computed = static_cast<int>(pending.size());
  CsvTable aggregate;
  aggregate.header = aggregate_header();
  for (const auto & row : summary.rows) {
    if (row.status != "ok") ++summary.failed;
    aggregate.rows.push_back(aggregate_cells(row));
  }
  write_file_atomic(out_dir / "aggregate.csv", render([&](std::ostream & os) { write_csv(os, aggregate); }));
  return summary;
}

bool is_trace_figure(const std::string & f) { return f == "fig2" || f == "fig3" || f == "fig4"; }

bool is_aggregate_figure(const std::string & f)
{
  return f == "fig5" || f == "fig6" || f == "fig7" || f == "acc_error";
}

PlotData plot_from_aggregate(const std::vector<AggregateRow> & rows, const std::string & figure)
{
  if (!is_aggregate_figure(figure)) {
    throw std::invalid_argument("unknown aggregate figure '" + figure + "'");
  }
  PlotData out;
  out.table.header = {"series", "x", "y", "y_std", "n_seeds"};
  if (rows.empty()) return out;

  const bool use_error = figure == "fig6" || figure == "acc_error";
  std::map<std::tuple<std::string, int, double>, std::vector<double>> cells;
  std::set<int> lengths;
  std::set<std::pair<int, std::string>> modes;
  std::set<double> pers;
  for (const auto & r : rows) {
    lengths.insert(r.n_vehicles);
    modes.insert({mode_rank(r.mode), r.mode});
    pers.insert(r.per);
    auto & bucket = cells[{r.mode, r.n_vehicles, r.per}];
    if (r.status == "ok") bucket.push_back(use_error ? r.p95_error : r.mean_speed_diff);
  }

  std::vector<SeriesSpec> series;
  if (figure == "fig5" || figure == "fig6") {
    for (const auto & [rank, mode] : modes) {
      for (double per : pers) series.push_back({mode + " " + per_label(per), mode, per});
    }
  } else if (figure == "fig7") {
    series = {{"ACC", "ACC", std::nullopt},
              {"CACC per=0", "CACC", 0.0},
              {"CACC per=0.6", "CACC", 0.6},
              {"Platooning per=0", "Platooning", 0.0},
              {"Platooning per=0.6", "Platooning", 0.6}};
  } else {
    series = {{"ACC", "ACC", std::nullopt},
              {"Platooning per=0", "Platooning", 0.0},
              {"Platooning per=0.6", "Platooning", 0.6}};
  }

  for (const auto & s : series) {
    for (int n : lengths) {
      const std::vector<double> * values = nullptr;
      if (s.per) {
        auto it = cells.find({s.mode, n, *s.per});
        if (it != cells.end()) values = &it->second;
      } else {
        for (double per : pers) {
          auto it = cells.find({s.mode, n, per});
          if (it != cells.end() && !it->second.empty()) {
            values = &it->second;
            break;
          }
        }
      }
      if (!values || values->empty()) {
        out.missing.push_back(
          s.mode + " n=" + std::to_string(n) + (s.per ? " " + per_label(*s.per) : std::string()));
        continue;
      }
      const Stats st = stats(*values);
      out.table.rows.push_back(
        {s.label, std::to_string(n), format_number(st.mean), format_number(st.stddev), std::to_string(st.n)});
    }
  }
  return out;
}

PlotData plot_from_traces(
  const std::vector<std::pair<std::string, std::vector<TraceRow>>> & traces, const std::string & figure)
{
  if (!is_trace_figure(figure)) {
    throw std::invalid_argument("unknown trace figure '" + figure + "'");
  }
  PlotData out;
  out.table.header = {"series", "x", "y"};
  for (const auto & [label, rows] : traces) {
    const std::string prefix = label.empty() ? "" : label + " ";
    if (figure == "fig4") {
      std::map<int, std::tuple<double, double, double>> per_step;  // t, min, max
      for (const auto & r : rows) {
        auto [it, fresh] = per_step.try_emplace(r.step, r.t, r.v, r.v);
        if (!fresh) {
          auto & [t, lo, hi] = it->second;
          lo = std::min(lo, r.v);
          hi = std::max(hi, r.v);
        }
      }
      for (const auto & [step, v] : per_step) {
        const auto & [t, lo, hi] = v;
        out.table.rows.push_back({label.empty() ? "speed_difference" : label, format_number(t), format_number(hi - lo)});
      }
      continue;
    }
    std::vector<const TraceRow *> sorted;
    for (const auto & r : rows) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const TraceRow * a, const TraceRow * b) {
      return a->vehicle_id < b->vehicle_id;
    });
    for (const TraceRow * r : sorted) {
      out.table.rows.push_back(
        {prefix + "vehicle " + std::to_string(r->vehicle_id), format_number(r->t),
         format_number(figure == "fig2" ? r->v : r->a_cmd)});
    }
  }
  return out;
}

}  // namespace platoon
