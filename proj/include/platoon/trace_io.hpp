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

#ifndef PLATOON__TRACE_IO_HPP_
#define PLATOON__TRACE_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/metrics.hpp"
#include "platoon/sim_engine.hpp"

namespace platoon
{

/// Malformed CSV input.
class CsvError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double; "" for NaN.
std::string format_number(double value);
/// Inverse of format_number; "" gives NaN.
double parse_number(const std::string & text);

/// Header plus rows of raw cells. Cells never contain commas or quotes.
struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws CsvError if absent.
  std::size_t column(const std::string & name) const;
};

CsvTable read_csv(std::istream & in);
CsvTable read_csv_file(const std::filesystem::path & path);
void write_csv(std::ostream & out, const CsvTable & table);

/// Writes `text` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path & path, const std::string & text);

// --- trace ---------------------------------------------------------------

/// Columns: step, t, vehicle_id, x, y, v, phi, a_cmd, delta_cmd, gap,
/// desired_gap, gap_error, solver_status, rx_from_0 .. rx_from_{N-2}.
/// Leader rows leave gap..solver_status empty; rx_from_j is empty unless
/// j < vehicle_id. gap_error is signed (s for CACC, m otherwise) and empty
/// where undefined.
std::vector<std::string> trace_header(int n_vehicles);
void write_trace_csv(std::ostream & out, const SimTrace & trace);

struct TraceRow
{
  int step{0};
  double t{0.0};
  int vehicle_id{0};
  double x{0.0};
  double y{0.0};
  double v{0.0};
  double phi{0.0};
  double a_cmd{0.0};
  double delta_cmd{0.0};
  double gap{0.0};  // NaN for the leader
  double desired_gap{0.0};
  double gap_error{0.0};
  std::string solver_status;
  std::vector<std::optional<int>> rx;  // rx[j] for j = 0..N-2
};

std::vector<TraceRow> read_trace_csv(std::istream & in);

// --- reports -------------------------------------------------------------

std::vector<std::string> report_header();
std::vector<std::string> report_row(const MetricsReport & report);
void write_report_csv(std::ostream & out, const MetricsReport & report);

/// vehicle_id, p95_error, amplification_ratio (vs. the vehicle ahead).
void write_vehicle_report_csv(std::ostream & out, const MetricsReport & report);

// --- sweep aggregate -----------------------------------------------------

struct AggregateRow
{
  std::string mode;
  int n_vehicles{0};
  double per{0.0};
  std::uint64_t seed{0};
  std::string status;  // ok, collision, error
  double mean_speed_diff{0.0};
  double max_speed_diff{0.0};
  double p95_error{0.0};
  std::string error_unit;
  double max_amplification{0.0};  // NaN when no ratio is defined
  int infeasible_events{0};
  std::string message;
};

std::vector<std::string> aggregate_header();
std::vector<std::string> aggregate_cells(const AggregateRow & row);
AggregateRow aggregate_from_cells(const CsvTable & table, const std::vector<std::string> & cells);
AggregateRow aggregate_from_report(const MetricsReport & report);
std::vector<AggregateRow> read_aggregate(const CsvTable & table);

}  // namespace platoon

#endif  // PLATOON__TRACE_IO_HPP_
