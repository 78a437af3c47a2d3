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

#ifndef PLATOON__CONFIG_IO_HPP_
#define PLATOON__CONFIG_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "platoon/sim_engine.hpp"

namespace platoon
{

/// A configuration document that does not parse or does not validate.
/// `where` is a JSON path ("leader.period") or a source position ("line 4, column 7").
class ConfigError : public std::invalid_argument
{
public:
  ConfigError(std::string where, std::string message)
  : std::invalid_argument(where + ": " + message), where_(std::move(where)), message_(std::move(message))
  {
  }
  const std::string & where() const { return where_; }
  const std::string & message() const { return message_; }

private:
  std::string where_;
  std::string message_;
};

struct SweepSpec
{
  std::vector<ControlMode> modes{ControlMode::kAcc, ControlMode::kCacc, ControlMode::kPlatooning};
  std::vector<int> lengths{5, 10, 15, 20, 25};
  std::vector<double> pers{0.0, 0.2, 0.4, 0.6};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  ScenarioConfig scenario{};  // template; mode, n_vehicles, per and seed are overwritten
  bool save_traces{false};
};

/// Throws ConfigError for unknown keys, wrong types and out-of-range values.
ScenarioConfig scenario_from_json(const nlohmann::json & doc);
nlohmann::json to_json(const ScenarioConfig & config);

SweepSpec sweep_from_json(const nlohmann::json & doc);
nlohmann::json to_json(const SweepSpec & spec);

/// Parses a file; syntax errors report the line and column.
nlohmann::json read_json_file(const std::filesystem::path & path);

ScenarioConfig load_scenario(const std::filesystem::path & path);
SweepSpec load_sweep(const std::filesystem::path & path);

/// The cell (mode, n, per, seed) of a sweep as a runnable scenario.
ScenarioConfig make_cell(
  const SweepSpec & spec, ControlMode mode, int n_vehicles, double per, std::uint64_t seed);

}  // namespace platoon

#endif  // PLATOON__CONFIG_IO_HPP_
