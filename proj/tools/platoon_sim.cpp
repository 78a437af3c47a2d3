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

// platoon_sim: run a scenario, sweep a PER x length grid, or turn results
// into plot-ready CSV.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure (collision, I/O).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "platoon/config_io.hpp"
#include "platoon/experiment.hpp"
#include "platoon/trace_io.hpp"

namespace fs = std::filesystem;
using namespace platoon;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;
constexpr const char * kOutEnv = "PLATOON_SIM_OUT";

fs::path default_out(const std::string & leaf)
{
  const char * env = std::getenv(kOutEnv);
  const fs::path root = env && *env ? fs::path(env) : fs::path("platoon_out");
  return root / leaf;
}

void print_report(const MetricsReport & r)
{
  std::cout << "mode " << to_string(r.mode) << ", N=" << r.n_vehicles << ", per=" << r.per
            << ", seed=" << r.seed << "\n"
            << "  p95 gap error      " << format_number(r.p95_error) << " " << r.error_unit << "\n"
            << "  mean speed diff    " << format_number(r.mean_speed_diff) << " m/s\n"
            << "  max speed diff     " << format_number(r.max_speed_diff) << " m/s\n";
  if (r.max_amplification) {
    std::cout << "  max amplification  " << format_number(*r.max_amplification) << "\n";
  }
  for (std::size_t e = 0; e < r.settle_times.size(); ++e) {
    std::cout << "  settle event " << e + 1 << "     " << format_number(r.settle_times[e].seconds) << " s"
              << (r.settle_times[e].settled ? "" : " (not settled)") << "\n";
  }
  std::cout << "  infeasible solves  " << r.infeasible_events << "\n";
}

int cmd_run(const fs::path & config_path, std::optional<fs::path> out, std::optional<std::uint64_t> seed)
{
  ScenarioConfig config = load_scenario(config_path);
  if (seed) config.seed = *seed;
  const fs::path dir = out ? *out : default_out(config_path.stem().string());
  const MetricsReport report = run_scenario(config, dir);
  print_report(report);
  std::cout << "wrote " << (dir / "trace.csv").string() << ", report.csv, vehicles.csv\n";
  return kExitOk;
}

int cmd_sweep(
  const fs::path & config_path, std::optional<fs::path> out, std::optional<std::uint64_t> seed, int workers)
{
  SweepSpec spec = load_sweep(config_path);
  if (seed) spec.seeds = {*seed};
  const fs::path dir = out ? *out : default_out(config_path.stem().string());
  const SweepSummary s = run_sweep(spec, dir, workers, &std::cerr);
  std::cout << s.rows.size() << " cells (" << s.computed << " computed, " << s.reused << " reused, "
            << s.failed << " failed)\nwrote " << (dir / "aggregate.csv").string() << "\n";
  for (const auto & row : s.rows) {
    if (row.status != "ok") {
      std::cout << "  " << cell_name(*parse_control_mode(row.mode), row.n_vehicles, row.per, row.seed)
                << ": " << row.status << ": " << row.message << "\n";
    }
  }
  return kExitOk;
}

std::string trace_label(const fs::path & p)
{
  return p.stem() == "trace" && p.has_parent_path() ? p.parent_path().filename().string() : p.stem().string();
}

int cmd_plotdata(const std::vector<fs::path> & inputs, const std::string & figure, std::optional<fs::path> out)
{
  PlotData data;
  if (is_trace_figure(figure)) {
    std::vector<std::pair<std::string, std::vector<TraceRow>>> traces;
    for (const auto & p : inputs) {
      std::ifstream in(p);
      if (!in) throw CsvError("cannot open " + p.string());
      traces.emplace_back(inputs.size() == 1 && figure != "fig4" ? "" : trace_label(p), read_trace_csv(in));
    }
    data = plot_from_traces(traces, figure);
  } else if (is_aggregate_figure(figure)) {
    std::vector<AggregateRow> rows;
    for (const auto & p : inputs) {
      const auto part = read_aggregate(read_csv_file(p));
      rows.insert(rows.end(), part.begin(), part.end());
    }
    data = plot_from_aggregate(rows, figure);
  } else {
    std::cerr << "unknown figure '" << figure << "' (fig2, fig3, fig4, fig5, fig6, fig7, acc_error)\n";
    return kExitInvalid;
  }

  if (out) {
    std::ostringstream os;
    write_csv(os, data.table);
    write_file_atomic(*out, os.str());
  } else {
    write_csv(std::cout, data.table);
  }
  if (!data.missing.empty()) {
    std::cerr << "missing cells for " << figure << ":\n";
    for (const auto & m : data.missing) std::cerr << "  " << m << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Platoon MPC simulator (ACC, CACC, Platooning over a lossy V2V channel)"};
  app.require_subcommand(1);

  fs::path run_config;
  std::optional<fs::path> run_out;
  std::optional<std::uint64_t> run_seed;
  auto * run = app.add_subcommand("run", "Simulate one scenario; writes trace.csv and report.csv");
  run->add_option("--config", run_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, std::string("Output directory (default $") + kOutEnv + "/<config>)");
  run->add_option("--seed", run_seed, "Override the channel seed");

  fs::path sweep_config;
  std::optional<fs::path> sweep_out;
  std::optional<std::uint64_t> sweep_seed;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto * sweep = app.add_subcommand("sweep", "Run a mode x length x PER x seed grid; resumable");
  sweep->add_option("--config", sweep_config, "Sweep JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, std::string("Output directory (default $") + kOutEnv + "/<config>)");
  sweep->add_option("--seed", sweep_seed, "Run only this seed");
  sweep->add_option("--workers", workers, "Parallel cells")->check(CLI::PositiveNumber);

  std::vector<fs::path> inputs;
  std::string figure;
  std::optional<fs::path> plot_out;
  auto * plot = app.add_subcommand("plotdata", "Plot-ready CSV from an aggregate or from traces");
  plot->add_option("--input", inputs, "aggregate.csv (fig5-7, acc_error) or trace CSVs (fig2-4)")
    ->required()
    ->check(CLI::ExistingFile);
  plot->add_option("--figure", figure, "fig2, fig3, fig4, fig5, fig6, fig7 or acc_error")->required();
  plot->add_option("--out", plot_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(run_config, run_out, run_seed);
    if (*sweep) return cmd_sweep(sweep_config, sweep_out, sweep_seed, workers);
    return cmd_plotdata(inputs, figure, plot_out);
  } catch (const CollisionError & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::invalid_argument & e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const CsvError & e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
