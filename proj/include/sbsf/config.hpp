// Copyright 2026 The sbsf Authors
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

#pragma once

#include "sbsf/errors.hpp"
#include "sbsf/experiments.hpp"
#include "sbsf/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace sbsf {

enum class ScenarioKind { single_robot, intersection, sweep };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::single_robot: return "single_robot";
    case ScenarioKind::intersection: return "intersection";
    case ScenarioKind::sweep: return "sweep";
  }
  return "unknown";
}

// Random crossing cases drawn per episode instead of a fixed vehicle list.
struct RandomVehicles {
  bool enabled = false;
  std::size_t count = 3;
  double max_entry = 3.0;
  double min_headway = 0.6;
};

struct RunConfig {
  ScenarioKind scenario = ScenarioKind::single_robot;
  std::uint64_t seed = 0;
  ScenarioParams scenario_params;
  bool n_from_epsilon = true;  // false when n was given explicitly
  std::size_t episodes = 1;
  FilterSettings filter;

  SingleRobotScenario robot;  // single_robot and sweep
  GoalMpcConfig nominal;
  SweepGrid grid;
  std::size_t rate_trials = 10000;

  IntersectionScenario intersection;
  RandomVehicles random_vehicles;

  std::string canonical;  // normalised JSON of the input, hashed into outputs
};

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

inline std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a(cfg.canonical)); }

namespace detail {

using nlohmann::json;

// Walks one JSON object, remembers which keys were read and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  [[nodiscard]] std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(key_path(key), "missing required key");
    return j_.at(key);
  }

  Section child(const std::string& key) { return Section(raw(key), key_path(key)); }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key_path(key), "must be finite");
    return d;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : (used_.insert(key), fallback); }

  double positive(const std::string& key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) throw ConfigError(key_path(key), "must be positive");
    return d;
  }

  std::uint64_t count(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(key_path(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) { return has(key) ? count(key) : (used_.insert(key), fallback); }

  std::size_t at_least(const std::string& key, std::uint64_t fallback, std::uint64_t lo) {
    const auto n = count(key, fallback);
    if (n < lo) throw ConfigError(key_path(key), "must be >= " + std::to_string(lo));
    return static_cast<std::size_t>(n);
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  // A number is broadcast to every input dimension; an array must match it.
  std::vector<double> per_dim(const std::string& key, std::size_t dim, double fallback) {
    if (!has(key)) return std::vector<double>(dim, fallback);
    const auto& v = raw(key);
    std::vector<double> out;
    if (v.is_number()) {
      out.assign(dim, v.get<double>());
    } else if (v.is_array()) {
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(key_path(key), "expected numbers");
        out.push_back(e.get<double>());
      }
      if (out.size() != dim) {
        throw ConfigError(key_path(key), "expected " + std::to_string(dim) + " values, got " + std::to_string(out.size()));
      }
    } else {
      throw ConfigError(key_path(key), "expected a number or an array");
    }
    for (double d : out) {
      if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError(key_path(key), "values must be positive");
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(key_path(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline Point2 read_point(Section s) {
  Point2 p{s.number("x"), s.number("y")};
  s.finish();
  return p;
}

inline void read_scenario_params(Section s, RunConfig& cfg) {
  const bool has_eps = s.has("epsilon"), has_beta = s.has("beta"), has_n = s.has("n");
  if (has_n && (has_eps || has_beta)) {
    throw ConfigError(s.key_path("n"), "give either epsilon and beta, or n, not both");
  }
  if (has_n) {
    cfg.scenario_params.n = s.at_least("n", 0, 1);
    cfg.scenario_params.epsilon = 0.0;
    cfg.scenario_params.beta = 0.0;
    cfg.n_from_epsilon = false;
  } else {
    if (!has_eps || !has_beta) throw ConfigError(s.key_path(has_eps ? "beta" : "epsilon"), "missing required key");
    const double eps = s.number("epsilon"), beta = s.number("beta");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError(s.key_path("epsilon"), "must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError(s.key_path("beta"), "must lie in (0, 1)");
    cfg.scenario_params = make_scenario(eps, beta);
    cfg.n_from_epsilon = true;
  }
  s.finish();
}

inline void read_sampler(Section s, RunConfig& cfg, std::size_t control_dim) {
  const auto kind = s.text("kind");
  if (kind == "svgd") {
    cfg.filter.kind = SamplerKind::svgd;
  } else if (kind == "cem") {
    cfg.filter.kind = SamplerKind::cem;
  } else {
    throw ConfigError(s.key_path("kind"), "expected \"svgd\" or \"cem\"");
  }
  // defaults were installed by the caller for the scenario's dimension
  auto& sv = cfg.filter.svgd;
  if (s.has("svgd")) {
    auto t = s.child("svgd");
    sv.particles = t.at_least("particles", sv.particles, 1);
    sv.iterations = t.at_least("iterations", sv.iterations, 0);
    sv.alpha = t.positive("alpha", sv.alpha);
    sv.step_size = t.positive("step_size", sv.step_size);
    sv.prior_cov = t.per_dim("prior_cov", control_dim, sv.prior_cov[0]);
    if (t.has("mixture_cov")) sv.mixture_cov = t.per_dim("mixture_cov", control_dim, 1.0);
    sv.perturbations = t.at_least("perturbations", sv.perturbations, 2);
    sv.perturbation_cov = t.per_dim("perturbation_cov", control_dim, sv.perturbation_cov[0]);
    sv.warm_start = t.flag("warm_start", sv.warm_start);
    t.finish();
  }
  auto& ce = cfg.filter.cem;
  if (s.has("cem")) {
    auto t = s.child("cem");
    ce.population = t.at_least("population", ce.population, 0);
    ce.elite_frac = t.number("elite_frac", ce.elite_frac);
    if (!(ce.elite_frac > 0.0 && ce.elite_frac <= 1.0)) throw ConfigError(t.key_path("elite_frac"), "must lie in (0, 1]");
    ce.iterations = t.at_least("iterations", ce.iterations, 0);
    ce.init_cov = t.per_dim("init_cov", control_dim, ce.init_cov[0]);
    ce.cov_floor = t.positive("cov_floor", ce.cov_floor);
    t.finish();
  }
  if (cfg.filter.kind == SamplerKind::svgd && !s.has("svgd")) throw ConfigError(s.key_path("svgd"), "missing required section");
  if (cfg.filter.kind == SamplerKind::cem && !s.has("cem")) throw ConfigError(s.key_path("cem"), "missing required section");
  s.finish();
}

inline void read_filter(Section s, RunConfig& cfg, std::size_t default_horizon) {
  cfg.filter.enabled = s.flag("enabled", true);
  cfg.filter.horizon = s.at_least("horizon", default_horizon, 1);
  cfg.filter.init_attempts = s.at_least("init_attempts", 10, 0);
  if (s.has("cost")) {
    auto c = s.child("cost");
    const auto mode = c.text("mode", "plain");
    if (mode == "plain") {
      cfg.filter.cost = {CostMode::plain, 0.0};
    } else if (mode == "cbf") {
      const double g = c.number("gamma");
      if (!(g > 0.0 && g < 1.0)) throw ConfigError(c.key_path("gamma"), "must lie in (0, 1)");
      cfg.filter.cost = {CostMode::cbf, g};
    } else {
      throw ConfigError(c.key_path("mode"), "expected \"plain\" or \"cbf\"");
    }
    c.finish();
  }
  s.finish();
}

inline void read_unicycle(Section s, UnicycleLimits& lim) {
  lim.dt = s.positive("dt", lim.dt);
  lim.omega_max = s.positive("omega_max", lim.omega_max);
  lim.accel_max = s.positive("accel_max", lim.accel_max);
  lim.v_max = s.positive("v_max", lim.v_max);
  s.finish();
}

inline void read_vehicle(Section s, VehicleLimits& lim) {
  lim.dt = s.positive("dt", lim.dt);
  lim.accel_max = s.positive("accel_max", lim.accel_max);
  lim.v_max = s.positive("v_max", lim.v_max);
  s.finish();
}

inline void read_obstacle_safety(Section s, SingleRobotScenario& sc) {
  sc.robot_radius = s.positive("robot_radius", sc.robot_radius);
  sc.level_scale = s.positive("scale", sc.level_scale);
  const auto& list = s.raw("obstacles");
  if (!list.is_array() || list.empty()) throw ConfigError(s.key_path("obstacles"), "expected a non-empty array");
  sc.obstacles.clear();
  for (std::size_t i = 0; i < list.size(); ++i) {
    Section o(list[i], s.key_path("obstacles") + "[" + std::to_string(i) + "]");
    CircleObstacle c{{o.number("x"), o.number("y")}, o.positive("r", 0.0)};
    o.finish();
    sc.obstacles.push_back(c);
  }
  s.finish();
}

inline UnicycleState read_unicycle_state(Section s) {
  UnicycleState x{s.number("x"), s.number("y"), s.number("theta", 0.0), s.number("v", 0.0)};
  s.finish();
  return x;
}

inline void read_nominal(Section s, GoalMpcConfig& n) {
  n.samples = s.at_least("samples", n.samples, 1);
  n.horizon = s.at_least("horizon", n.horizon, 1);
  n.alpha = s.positive("alpha", n.alpha);
  n.cov = s.per_dim("cov", 2, n.cov[0]);
  n.effort = s.number("effort", n.effort);
  n.warm_start = s.flag("warm_start", n.warm_start);
  s.finish();
}

inline void read_robot_experiment(Section s, RunConfig& cfg, bool sweep) {
  auto& sc = cfg.robot;
  if (sweep) {
    auto g = s.child("grid");
    cfg.grid.x_min = g.number("x_min");
    cfg.grid.x_max = g.number("x_max");
    cfg.grid.y_min = g.number("y_min");
    cfg.grid.y_max = g.number("y_max");
    cfg.grid.step = g.positive("step", 0.01);
    cfg.grid.v = g.number("v", 1.0);
    cfg.grid.theta = g.number("theta", 0.0);
    if (cfg.grid.x_max < cfg.grid.x_min) throw ConfigError(g.key_path("x_max"), "must be >= x_min");
    if (cfg.grid.y_max < cfg.grid.y_min) throw ConfigError(g.key_path("y_max"), "must be >= y_min");
    g.finish();
    cfg.rate_trials = s.at_least("rate_trials", 10000, 0);
  } else {
    sc.start = read_unicycle_state(s.child("start"));
    sc.goal = read_point(s.child("goal"));
    sc.goal_radius = s.positive("goal_radius", 0.15);
    sc.max_steps = s.at_least("max_steps", 600, 1);
    cfg.episodes = s.at_least("episodes", 1, 1);
    if (s.has("nominal")) read_nominal(s.child("nominal"), cfg.nominal);
  }
  s.finish();
}

inline void read_intersection_experiment(Section s, RunConfig& cfg) {
  auto& sc = cfg.intersection;
  if (s.has("layout")) {
    auto l = s.child("layout");
    sc.layout.lane_width = l.positive("lane_width", sc.layout.lane_width);
    sc.layout.approach_length = l.positive("approach_length", sc.layout.approach_length);
    sc.layout.exit_length = l.positive("exit_length", sc.layout.exit_length);
    l.finish();
  }
  sc.initial_speed = s.number("initial_speed", sc.initial_speed);
  sc.target_speed = s.number("target_speed", sc.target_speed);
  sc.gain = s.positive("gain", sc.gain);
  sc.max_steps = s.at_least("max_steps", 400, 1);
  cfg.episodes = s.at_least("episodes", 1, 1);
  if (s.has("vehicles") == s.has("random_vehicles")) {
    throw ConfigError(s.key_path("vehicles"), "give exactly one of vehicles or random_vehicles");
  }
  if (s.has("vehicles")) {
    const auto& list = s.raw("vehicles");
    if (!list.is_array() || list.empty() || list.size() > kMaxVehicles) {
      throw ConfigError(s.key_path("vehicles"), "expected 1 to " + std::to_string(kMaxVehicles) + " vehicles");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section v(list[i], s.key_path("vehicles") + "[" + std::to_string(i) + "]");
      VehicleSpec spec;
      try {
        spec.from = parse_approach(v.text("from"));
        spec.to = parse_approach(v.text("to"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(v.key_path("from/to"), e.what());
      }
      if (spec.from == spec.to) throw ConfigError(v.key_path("to"), "must differ from the approach");
      spec.entry_time = v.number("entry_time", 0.0);
      if (spec.entry_time < 0.0) throw ConfigError(v.key_path("entry_time"), "must be >= 0");
      v.finish();
      sc.vehicles.push_back(spec);
    }
  } else {
    auto r = s.child("random_vehicles");
    auto& rv = cfg.random_vehicles;
    rv.enabled = true;
    rv.count = r.at_least("count", 3, 1);
    if (rv.count > kMaxVehicles) throw ConfigError(r.key_path("count"), "at most " + std::to_string(kMaxVehicles));
    rv.max_entry = r.number("max_entry", 3.0);
    rv.min_headway = r.number("min_headway", 0.6);
    if (rv.max_entry < 0.0) throw ConfigError(r.key_path("max_entry"), "must be >= 0");
    r.finish();
    // placeholder list so the vehicle count is known before the first draw
    sc.vehicles.assign(rv.count, VehicleSpec{});
  }
  s.finish();
}

inline void read_intersection_safety(Section s, IntersectionScenario& sc) {
  sc.level_scale = s.positive("scale", sc.level_scale);
  sc.free_distance = s.positive("free_distance", sc.free_distance);
  if (s.has("footprint")) {
    auto f = s.child("footprint");
    sc.footprint.length = f.positive("length", sc.footprint.length);
    sc.footprint.width = f.positive("width", sc.footprint.width);
    f.finish();
  }
  s.finish();
}

}  // namespace detail

// Parses and validates a JSON run configuration. Every error names the
// offending key path.
inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  using detail::Section;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw ConfigError("", "empty configuration; required: scenario, seed, scenario_params, sampler, model, safety, experiment");
    }
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  static const char* required[] = {"scenario", "seed", "scenario_params", "sampler", "model", "safety", "experiment"};
  std::string missing;
  for (const char* k : required) {
    if (!j.contains(k)) missing += missing.empty() ? k : std::string(", ") + k;
  }
  if (!missing.empty()) throw ConfigError(missing.find(',') == std::string::npos ? missing : "", "missing required sections: " + missing);

  RunConfig cfg;
  cfg.canonical = j.dump();
  Section root(j, "");

  const auto scenario = root.text("scenario");
  if (scenario == "single_robot") {
    cfg.scenario = ScenarioKind::single_robot;
  } else if (scenario == "intersection") {
    cfg.scenario = ScenarioKind::intersection;
  } else if (scenario == "sweep") {
    cfg.scenario = ScenarioKind::sweep;
  } else {
    throw ConfigError("scenario", "expected single_robot, intersection or sweep");
  }
  cfg.seed = root.count("seed");
  cfg.filter.workers = root.at_least("workers", 1, 1);
  detail::read_scenario_params(root.child("scenario_params"), cfg);
  cfg.filter.samples = cfg.scenario_params.n;

  const bool vehicles = cfg.scenario == ScenarioKind::intersection;
  {
    auto m = root.child("model");
    if (vehicles) {
      detail::read_vehicle(m.child("vehicle"), cfg.intersection.limits);
    } else {
      detail::read_unicycle(m.child("unicycle"), cfg.robot.limits);
    }
    m.finish();
  }
  if (vehicles) {
    detail::read_intersection_safety(root.child("safety"), cfg.intersection);
    detail::read_intersection_experiment(root.child("experiment"), cfg);
  } else {
    detail::read_obstacle_safety(root.child("safety"), cfg.robot);
    detail::read_robot_experiment(root.child("experiment"), cfg, cfg.scenario == ScenarioKind::sweep);
  }
  const std::size_t control_dim = vehicles ? cfg.intersection.vehicles.size() : 2;
  {
    const auto base = vehicles ? vehicle_filter_defaults(control_dim) : robot_filter_defaults();
    cfg.filter.svgd = base.svgd;
    cfg.filter.cem = base.cem;
  }
  detail::read_sampler(root.child("sampler"), cfg, control_dim);
  if (root.has("filter")) {
    detail::read_filter(root.child("filter"), cfg, vehicles ? 67 : 20);
  } else {
    cfg.filter.horizon = vehicles ? 67 : 20;
  }
  root.finish();

  // cross-field checks
  try {
    if (vehicles) {
      check_stop_horizon(IntersectionModel(control_dim, cfg.intersection.limits), cfg.filter.horizon);
    } else {
      check_stop_horizon(UnicycleModel(cfg.robot.limits), cfg.filter.horizon);
    }
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    if (msg.rfind(e.path() + ": ", 0) == 0) msg.erase(0, e.path().size() + 2);
    throw ConfigError("filter.horizon", msg);
  }
  if (cfg.filter.kind == SamplerKind::cem) {
    const auto pop = cfg.filter.cem.population == 0 ? cfg.filter.samples : cfg.filter.cem.population;
    if (cfg.filter.cem.elite_count(pop) < 1) throw ConfigError("sampler.cem.elite_frac", "population * elite_frac must be >= 1");
  }
  return cfg;
}

}  // namespace sbsf
