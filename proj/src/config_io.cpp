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

#include "platoon/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace platoon
{
namespace
{

using nlohmann::json;

constexpr double kSinusoidDuration = 300.0;

// Typed access to one JSON object; remembers which keys were read so that
// leftovers (usually typos) can be reported.
class Reader
{
public:
  Reader(const json & obj, std::string path) : obj_(obj), path_(std::move(path))
  {
    if (!obj_.is_object()) throw ConfigError(label(), "expected an object");
  }

  bool has(const std::string & key) const { return obj_.contains(key); }

  std::string where(const std::string & key) const
  {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json * find(const std::string & key)
  {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string & key, double & out)
  {
    if (const json * v = find(key)) {
      if (!v->is_number()) throw ConfigError(where(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(where(key), "must be finite");
    }
  }

  void integer(const std::string & key, int & out)
  {
    if (const json * v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void unsigned_integer(const std::string & key, std::uint64_t & out)
  {
    if (const json * v = find(key)) {
      if (!v->is_number_unsigned()) {
        throw ConfigError(where(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string & key, bool & out)
  {
    if (const json * v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  std::optional<std::string> text(const std::string & key)
  {
    if (const json * v = find(key)) {
      if (!v->is_string()) throw ConfigError(where(key), "expected a string");
      return v->get<std::string>();
    }
    return std::nullopt;
  }

  template <int N>
  void vector(const std::string & key, Eigen::Matrix<double, N, 1> & out)
  {
    if (const json * v = find(key)) {
      if (!v->is_array() || v->size() != N) {
        throw ConfigError(where(key), "expected an array of " + std::to_string(N) + " numbers");
      }
      for (int i = 0; i < N; ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(where(key), "expected numbers");
        out[i] = (*v)[i].get<double>();
      }
    }
  }

  std::optional<Reader> child(const std::string & key)
  {
    if (const json * v = find(key)) return Reader(*v, where(key));
    return std::nullopt;
  }

  void finish() const
  {
    for (const auto & item : obj_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(where(item.key()), "unknown key");
    }
  }

private:
  std::string label() const { return path_.empty() ? "document" : path_; }

  const json & obj_;
  std::string path_;
  std::set<std::string> seen_;
};

ControlMode mode_from(const std::string & text, const std::string & where)
{
  if (auto m = parse_control_mode(text)) return *m;
  throw ConfigError(where, "unknown mode '" + text + "' (ACC, CACC, Platooning)");
}

LeaderProfileKind profile_from(const std::string & text, const std::string & where)
{
  if (text == "constant") return LeaderProfileKind::kConstant;
  if (text == "step") return LeaderProfileKind::kStepTest;
  if (text == "sinusoid") return LeaderProfileKind::kSinusoid;
  throw ConfigError(where, "unknown profile '" + text + "' (constant, step, sinusoid)");
}

std::string hold_name(HoldModel hold)
{
  return hold == HoldModel::kConstantAcceleration ? "constant_acceleration" : "constant_speed";
}

void read_leader(Reader r, LeaderProfile & p)
{
  if (auto kind = r.text("profile")) p.kind = profile_from(*kind, r.where("profile"));
  r.number("v_initial", p.v_initial);
  r.number("v_low", p.v_low);
  r.number("v_high", p.v_high);
  r.number("t_decel", p.t_decel);
  r.number("t_accel", p.t_accel);
  r.number("ramp_rate", p.ramp_rate);
  r.number("v_min", p.v_min);
  r.number("v_max", p.v_max);
  r.number("period", p.period);
  r.number("accel_limit", p.accel_limit);
  r.finish();
}

template <typename T>
std::vector<T> read_list(
  const json & v, const std::string & where, T (*convert)(const json &, const std::string &))
{
  if (!v.is_array() || v.empty()) throw ConfigError(where, "expected a non-empty array");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(convert(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ControlMode mode_item(const json & v, const std::string & where)
{
  if (!v.is_string()) throw ConfigError(where, "expected a mode name");
  return mode_from(v.get<std::string>(), where);
}

int length_item(const json & v, const std::string & where)
{
  if (!v.is_number_integer() || v.get<int>() < 2) {
    throw ConfigError(where, "expected an integer >= 2");
  }
  return v.get<int>();
}

double per_item(const json & v, const std::string & where)
{
  if (!v.is_number()) throw ConfigError(where, "expected a number");
  const double p = v.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(where, "must lie in [0, 1]");
  return p;
}

std::uint64_t seed_item(const json & v, const std::string & where)
{
  if (!v.is_number_unsigned()) throw ConfigError(where, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

ScenarioConfig scenario_from_json(const json & doc)
{
  ScenarioConfig c;
  Reader r(doc, "");
  r.integer("n_vehicles", c.n_vehicles);
  if (auto m = r.text("mode")) c.mode = mode_from(*m, "mode");
  r.number("per", c.per);
  r.unsigned_integer("seed", c.seed);
  r.number("dt", c.dt);
  r.number("vehicle_length", c.vehicle_length);
  if (auto h = r.text("hold")) {
    if (*h == "constant_speed") {
      c.hold = HoldModel::kConstantSpeed;
    } else if (*h == "constant_acceleration") {
      c.hold = HoldModel::kConstantAcceleration;
    } else {
      throw ConfigError("hold", "unknown hold model '" + *h + "'");
    }
  }
  if (auto leader = r.child("leader")) read_leader(*leader, c.leader);
  if (!r.has("duration") && c.leader.kind == LeaderProfileKind::kSinusoid) {
    c.duration = kSinusoidDuration;
  }
  r.number("duration", c.duration);

  if (auto p = r.child("policy")) {
    p->number("t_gap", c.policy.t_gap);
    p->number("d_const", c.policy.d_const);
    p->number("d_safety", c.policy.d_safety);
    p->finish();
  }
  if (auto w = r.child("weights")) {
    w->vector("q_ego", c.weights.q_ego);
    w->vector("r_u", c.weights.r_u);
    w->vector("r_du", c.weights.r_du);
    w->number("q_gap", c.weights.q_gap);
    w->number("q_rel_speed", c.weights.q_rel_speed);
    w->finish();
  }
  if (auto b = r.child("bounds")) {
    b->number("a_max", c.bounds.a_max);
    b->number("a_min", c.bounds.a_min);
    b->number("delta_max", c.bounds.delta_max);
    b->number("ddelta_max", c.bounds.ddelta_max);
    b->number("da_max", c.bounds.da_max);
    b->number("v_max", c.bounds.v_max);
    b->number("v_min", c.bounds.v_min);
    b->finish();
  }
  if (auto h = r.child("horizon")) {
    h->integer("steps", c.horizon.steps);
    h->finish();
  }
  if (auto q = r.child("qp")) {
    q->number("tol", c.qp.tol);
    q->integer("max_iter", c.qp.max_iter);
    q->number("regularization", c.qp.regularization);
    q->finish();
  }
  r.finish();

  try {
    validate(c);
  } catch (const ScenarioError & e) {
    throw ConfigError(e.field(), e.message());
  }
  return c;
}

json to_json(const ScenarioConfig & c)
{
  const LeaderProfile & p = c.leader;
  const MpcWeights & w = c.weights;
  const MpcBounds & b = c.bounds;
  return json{
    {"n_vehicles", c.n_vehicles},
    {"mode", std::string(to_string(c.mode))},
    {"per", c.per},
    {"seed", c.seed},
    {"duration", c.duration},
    {"dt", c.dt},
    {"vehicle_length", c.vehicle_length},
    {"hold", hold_name(c.hold)},
    {"leader",
     {{"profile", std::string(to_string(p.kind))},
      {"v_initial", p.v_initial},
      {"v_low", p.v_low},
      {"v_high", p.v_high},
      {"t_decel", p.t_decel},
      {"t_accel", p.t_accel},
      {"ramp_rate", p.ramp_rate},
      {"v_min", p.v_min},
      {"v_max", p.v_max},
      {"period", p.period},
      {"accel_limit", p.accel_limit}}},
    {"policy", {{"t_gap", c.policy.t_gap}, {"d_const", c.policy.d_const}, {"d_safety", c.policy.d_safety}}},
    {"weights",
     {{"q_ego", {w.q_ego[0], w.q_ego[1], w.q_ego[2], w.q_ego[3]}},
      {"r_u", {w.r_u[0], w.r_u[1]}},
      {"r_du", {w.r_du[0], w.r_du[1]}},
      {"q_gap", w.q_gap},
      {"q_rel_speed", w.q_rel_speed}}},
    {"bounds",
     {{"a_max", b.a_max},
      {"a_min", b.a_min},
      {"delta_max", b.delta_max},
      {"ddelta_max", b.ddelta_max},
      {"da_max", b.da_max},
      {"v_max", b.v_max},
      {"v_min", b.v_min}}},
    {"horizon", {{"steps", c.horizon.steps}}},
    {"qp", {{"tol", c.qp.tol}, {"max_iter", c.qp.max_iter}, {"regularization", c.qp.regularization}}},
  };
}

SweepSpec sweep_from_json(const json & doc)
{
  SweepSpec s;
  Reader r(doc, "");
  if (const json * v = r.find("modes")) s.modes = read_list<ControlMode>(*v, "modes", mode_item);
  if (const json * v = r.find("lengths")) s.lengths = read_list<int>(*v, "lengths", length_item);
  if (const json * v = r.find("pers")) s.pers = read_list<double>(*v, "pers", per_item);
  if (const json * v = r.find("seeds")) {
    s.seeds = read_list<std::uint64_t>(*v, "seeds", seed_item);
  }
  if (const json * v = r.find("num_seeds")) {
    if (r.has("seeds")) throw ConfigError("num_seeds", "give either seeds or num_seeds");
    if (!v->is_number_integer() || v->get<int>() < 1) {
      throw ConfigError("num_seeds", "expected an integer >= 1");
    }
    s.seeds.clear();
    for (int k = 1; k <= v->get<int>(); ++k) s.seeds.push_back(static_cast<std::uint64_t>(k));
  }
  r.boolean("save_traces", s.save_traces);
  if (const json * v = r.find("scenario")) {
    try {
      s.scenario = scenario_from_json(*v);
    } catch (const ConfigError & e) {
      throw ConfigError("scenario." + e.where(), e.message());
    }
  }
  r.finish();
  return s;
}

json to_json(const SweepSpec & s)
{
  json modes = json::array();
  for (ControlMode m : s.modes) modes.push_back(std::string(to_string(m)));
  return json{
    {"modes", modes},
    {"lengths", s.lengths},
    {"pers", s.pers},
    {"seeds", s.seeds},
    {"save_traces", s.save_traces},
    {"scenario", to_json(s.scenario)},
  };
}

json read_json_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error & e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(end), '\n');
    const auto last_nl = text.rfind('\n', end == 0 ? 0 : end - 1);
    const std::size_t column = last_nl == std::string::npos || end == 0 ? end + 1 : end - last_nl;
    std::ostringstream where;
    where << path.string() << ": line " << line << ", column " << column;
    throw ConfigError(where.str(), "syntax error");
  }
}

ScenarioConfig load_scenario(const std::filesystem::path & path)
{
  const json doc = read_json_file(path);
  try {
    return scenario_from_json(doc);
  } catch (const ConfigError & e) {
    throw ConfigError(path.string() + ": " + e.where(), e.message());
  }
}

SweepSpec load_sweep(const std::filesystem::path & path)
{
  const json doc = read_json_file(path);
  try {
    return sweep_from_json(doc);
  } catch (const ConfigError & e) {
    throw ConfigError(path.string() + ": " + e.where(), e.message());
  }
}

ScenarioConfig make_cell(
  const SweepSpec & spec, ControlMode mode, int n_vehicles, double per, std::uint64_t seed)
{
  ScenarioConfig c = spec.scenario;
  c.mode = mode;
  c.n_vehicles = n_vehicles;
  c.per = per;
  c.seed = seed;
  return c;
}

}  // namespace platoon
