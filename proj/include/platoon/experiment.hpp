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

#ifndef PLATOON__EXPERIMENT_HPP_
#define PLATOON__EXPERIMENT_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "platoon/config_io.hpp"
#include "platoon/metrics.hpp"
#include "platoon/trace_io.hpp"

namespace platoon
{

/// Runs one scenario and writes trace.csv, report.csv and vehicles.csv into
/// `out_dir`. CollisionError propagates after nothing has been written.
MetricsReport run_scenario(const ScenarioConfig & config, const std::filesystem::path & out_dir);

/// File stem of a sweep cell, e.g. "CACC_n15_per0.3_s2".
std::string cell_name(ControlMode mode, int n_vehicles, double per, std::uint64_t seed);

/// Runs (or reuses) one cell and returns its aggregate row. Never throws for
/// simulation failures; those become status "collision" or "error".
AggregateRow run_cell(const ScenarioConfig & cell, const std::filesystem::path * trace_path);

struct SweepSummary
{
  std::vector<AggregateRow> rows;  // sweep order: modes x lengths x pers x seeds
  int computed{0};
  int reused{0};
  int failed{0};
};

/// Every cell is written atomically to out_dir/cells/<cell_name>.csv; cells
/// already present are reused, so an interrupted sweep resumes. The combined
/// table goes to out_dir/aggregate.csv.
SweepSummary run_sweep(
  const SweepSpec & spec, const std::filesystem::path & out_dir, int workers,
  std::ostream * progress = nullptr);

struct PlotData
{
  CsvTable table;
  std::vector<std::string> missing;  // human-readable cell descriptions
};

/// Aggregate figures:
///  - fig5: mean speed difference, series "<mode> per=<p>", x = string length
///  - fig6: p95 error, same layout
///  - fig7: mean speed difference for ACC, CACC per=0/0.6, Platooning per=0/0.6
///  - acc_error: p95 error for ACC, Platooning per=0/0.6
/// Columns: series, x, y, y_std, n_seeds. y is the seed mean of "ok" rows.
PlotData plot_from_aggregate(const std::vector<AggregateRow> & rows, const std::string & figure);

/// Trace figures, one labelled trace per input:
///  - fig2: speed per vehicle over time
///  - fig3: commanded acceleration per vehicle over time
///  - fig4: speed difference over time, one series per trace
/// Columns: series, x, y.
PlotData plot_from_traces(
  const std::vector<std::pair<std::string, std::vector<TraceRow>>> & traces,
  const std::string & figure);

bool is_trace_figure(const std::string & figure);
bool is_aggregate_figure(const std::string & figure);

}  // namespace platoon

#endif  // PLATOON__EXPERIMENT_HPP_
