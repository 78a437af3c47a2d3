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

#include "platoon/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace platoon
{
namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kSettleColumns = 2;

// One CSV record; double quotes delimit cells that contain commas or quotes.
std::vector<std::string> split(const std::string & line)
{
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"') {
        cells.back() += c;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else if (c != '\r') {
      cells.back() += c;
    }
  }
  if (quoted) throw CsvError("unterminated quote in '" + line + "'");
  return cells;
}

std::string clean(std::string text)
{
  for (char & c : text) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

int parse_int(const std::string & text)
{
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw CsvError("not an integer: '" + text + "'");
  }
  return value;
}

std::uint64_t parse_u64(const std::string & text)
{
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw CsvError("not an unsigned integer: '" + text + "'");
  }
  return value;
}

void write_row(std::ostream & out, const std::vector<std::string> & cells)
{
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    const std::string & c = cells[i];
    if (c.find_first_of(",\"") == std::string::npos) {
      out << c;
      continue;
    }
    out << '"';
    for (char ch : c) out << (ch == '"' ? "\"\"" : std::string(1, ch));
    out << '"';
  }
  out << '\n';
}

// Signed gap error of one follower sample; NaN where undefined.
double signed_gap_error(const VehicleSample & s, const ScenarioConfig & c)
{
  if (c.mode == ControlMode::kCacc) {
    return s.state.v < kMinSpeedForTimeGap ? kNaN : s.gap / s.state.v - c.policy.t_gap;
  }
  return s.gap - s.desired_gap;
}

}  // namespace

std::string format_number(double value)
{
  if (std::isnan(value)) return "";
  if (value == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double parse_number(const std::string & text)
{
  if (text.empty()) return kNaN;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw CsvError("not a number: '" + text + "'");
  }
  return value;
}

std::size_t CsvTable::column(const std::string & name) const
{
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw CsvError("missing column '" + name + "'");
}

CsvTable read_csv(std::istream & in)
{
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) return table;
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw CsvError(
        "line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
        " cells, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  return read_csv(in);
}

void write_csv(std::ostream & out, const CsvTable & table)
{
  write_row(out, table.header);
  for (const auto & row : table.rows) write_row(out, row);
}

void write_file_atomic(const std::filesystem::path & path, const std::string & text)
{
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> trace_header(int n_vehicles)
{
  std::vector<std::string> h{"step", "t", "vehicle_id", "x", "y", "v", "phi", "a_cmd", "delta_cmd",
                             "gap", "desired_gap", "gap_error", "solver_status"};
  for (int j = 0; j + 1 < n_vehicles; ++j) h.push_back("rx_from_" + std::to_string(j));
  return h;
}

void write_trace_csv(std::ostream & out, const SimTrace & trace)
{
  const int n = trace.num_vehicles();
  write_row(out, trace_header(n));
  std::vector<std::string> cells;
  for (const auto & step : trace.steps) {
    for (int i = 0; i < n; ++i) {
      const VehicleSample & s = step.vehicles[i];
      cells.clear();
      cells.push_back(std::to_string(step.step));
      cells.push_back(format_number(step.t));
      cells.push_back(std::to_string(i));
      cells.push_back(format_number(s.state.x));
      cells.push_back(format_number(s.state.y));
      cells.push_back(format_number(s.state.v));
      cells.push_back(format_number(s.state.phi));
      cells.push_back(format_number(s.input.a));
      cells.push_back(format_number(s.input.delta));
      if (s.is_leader) {
        cells.insert(cells.end(), 4, "");
      } else {
        cells.push_back(format_number(s.gap));
        cells.push_back(format_number(s.desired_gap));
        cells.push_back(format_number(signed_gap_error(s, trace.config)));
        cells.push_back(std::string(to_string(s.fallback ? QpStatus::kInfeasible : s.status)));
      }
      for (int j = 0; j + 1 < n; ++j) {
        if (j < i && static_cast<std::size_t>(j) < step.delivered[i].size()) {
          cells.push_back(step.delivered[i][j] ? "1" : "0");
        } else {
          cells.emplace_back();
        }
      }
      write_row(out, cells);
    }
  }
}

std::vector<TraceRow> read_trace_csv(std::istream & in)
{
  const CsvTable table = read_csv(in);
  if (table.header.size() < 13) throw CsvError("trace: too few columns");
  for (std::size_t c = 0; c < 13; ++c) {
    if (table.header[c] != trace_header(1)[c]) {
      throw CsvError("trace: unexpected column '" + table.header[c] + "'");
    }
  }
  std::vector<TraceRow> rows;
  rows.reserve(table.rows.size());
  for (const auto & cells : table.rows) {
    TraceRow r;
    r.step = parse_int(cells[0]);
    r.t = parse_number(cells[1]);
    r.vehicle_id = parse_int(cells[2]);
    r.x = parse_number(cells[3]);
    r.y = parse_number(cells[4]);
    r.v = parse_number(cells[5]);
    r.phi = parse_number(cells[6]);
    r.a_cmd = parse_number(cells[7]);
    r.delta_cmd = parse_number(cells[8]);
    r.gap = parse_number(cells[9]);
    r.desired_gap = parse_number(cells[10]);
    r.gap_error = parse_number(cells[11]);
    r.solver_status = cells[12];
    for (std::size_t c = 13; c < cells.size(); ++c) {
      r.rx.push_back(cells[c].empty() ? std::nullopt : std::optional<int>(parse_int(cells[c])));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::string> report_header()
{
  std::vector<std::string> h{"mode", "n_vehicles", "per", "seed", "p95_error", "error_unit",
                             "mean_speed_diff", "max_speed_diff", "max_amplification"};
  for (int e = 1; e <= kSettleColumns; ++e) {
    h.push_back("settle_event" + std::to_string(e) + "_s");
    h.push_back("settled_event" + std::to_string(e));
  }
  h.push_back("infeasible_events");
  return h;
}

std::vector<std::string> report_row(const MetricsReport & r)
{
  std::vector<std::string> cells{
    std::string(to_string(r.mode)),
    std::to_string(r.n_vehicles),
    format_number(r.per),
    std::to_string(r.seed),
    format_number(r.p95_error),
    r.error_unit,
    format_number(r.mean_speed_diff),
    format_number(r.max_speed_diff),
    format_number(r.max_amplification.value_or(kNaN))};
  for (int e = 0; e < kSettleColumns; ++e) {
    if (static_cast<std::size_t>(e) < r.settle_times.size()) {
      cells.push_back(format_number(r.settle_times[e].seconds));
      cells.push_back(r.settle_times[e].settled ? "1" : "0");
    } else {
      cells.insert(cells.end(), 2, "");
    }
  }
  cells.push_back(std::to_string(r.infeasible_events));
  return cells;
}

void write_report_csv(std::ostream & out, const MetricsReport & report)
{
  write_row(out, report_header());
  write_row(out, report_row(report));
}

void write_vehicle_report_csv(std::ostream & out, const MetricsReport & r)
{
  write_row(out, {"vehicle_id", "p95_error", "amplification_ratio"});
  for (int i = 1; i < r.n_vehicles; ++i) {
    double ratio = kNaN;
    for (const auto & a : r.amplification_ratios) {
      if (a.vehicle == i && a.ratio) ratio = *a.ratio;
    }
    const auto idx = static_cast<std::size_t>(i - 1);
    write_row(
      out, {std::to_string(i),
            format_number(idx < r.per_vehicle_p95.size() ? r.per_vehicle_p95[idx] : kNaN),
            format_number(ratio)});
  }
}

std::vector<std::string> aggregate_header()
{
  return {"mode",     "n_vehicles", "per",         "seed",       "status",
          "mean_speed_diff", "max_speed_diff", "p95_error", "error_unit",
          "max_amplification", "infeasible_events", "message"};
}

std::vector<std::string> aggregate_cells(const AggregateRow & r)
{
  return {r.mode,
          std::to_string(r.n_vehicles),
          format_number(r.per),
          std::to_string(r.seed),
          r.status,
          format_number(r.mean_speed_diff),
          format_number(r.max_speed_diff),
          format_number(r.p95_error),
          r.error_unit,
          format_number(r.max_amplification),
          std::to_string(r.infeasible_events),
          clean(r.message)};
}

AggregateRow aggregate_from_cells(const CsvTable & table, const std::vector<std::string> & c)
{
  AggregateRow r;
  r.mode = c[table.column("mode")];
  r.n_vehicles = parse_int(c[table.column("n_vehicles")]);
  r.per = parse_number(c[table.column("per")]);
  r.seed = parse_u64(c[table.column("seed")]);
  r.status = c[table.column("status")];
  r.mean_speed_diff = parse_number(c[table.column("mean_speed_diff")]);
  r.max_speed_diff = parse_number(c[table.column("max_speed_diff")]);
  r.p95_error = parse_number(c[table.column("p95_error")]);
  r.error_unit = c[table.column("error_unit")];
  r.max_amplification = parse_number(c[table.column("max_amplification")]);
  r.infeasible_events = parse_int(c[table.column("infeasible_events")]);
  r.message = c[table.column("message")];
  return r;
}

AggregateRow aggregate_from_report(const MetricsReport & report)
{
  AggregateRow r;
  r.mode = std::string(to_string(report.mode));
  r.n_vehicles = report.n_vehicles;
  r.per = report.per;
  r.seed = report.seed;
  r.status = "ok";
  r.mean_speed_diff = report.mean_speed_diff;
  r.max_speed_diff = report.max_speed_diff;
  r.p95_error = report.p95_error;
  r.error_unit = report.error_unit;
  r.max_amplification = report.max_amplification.value_or(kNaN);
  r.infeasible_events = report.infeasible_events;
  return r;
}

std::vector<AggregateRow> read_aggregate(const CsvTable & table)
{
  std::vector<AggregateRow> out;
  if (table.header.empty()) return out;
  for (const auto & cells : table.rows) out.push_back(aggregate_from_cells(table, cells));
  return out;
}

}  // namespace platoon
