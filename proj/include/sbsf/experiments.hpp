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

#include "sbsf/cem.hpp"
#include "sbsf/errors.hpp"
#include "sbsf/filter.hpp"
#include "sbsf/intersection.hpp"
#include "sbsf/parallel.hpp"
#include "sbsf/problem.hpp"
#include "sbsf/rng.hpp"
#include "sbsf/safety.hpp"
#include "sbsf/scenario.hpp"
#include "sbsf/svgd.hpp"
#include "sbsf/unicycle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace sbsf {

enum class EpisodeStatus { goal_reached, max_steps, failure_entered, init_failed };

inline const char* to_string(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::goal_reached: return "goal_reached";
    case EpisodeStatus::max_steps: return "max_steps";
    case EpisodeStatus::failure_entered: return "failure_entered";
    case EpisodeStatus::init_failed: return "init_failed";
  }
  return "unknown";
}

struct StepRecord {
  std::uint64_t t = 0;
  std::vector<double> state;  // x_t, before the applied input
  std::vector<double> u_nom;
  std::vector<double> u_safe;
  Decision decision = Decision::pass;
  double min_cost = 0.0;
  std::size_t safe_count = 0;
};

struct EpisodeLog {
  std::vector<std::string> state_names;
  std::vector<std::string> control_names;
  std::vector<StepRecord> steps;
  std::vector<double> final_state;
  EpisodeStatus status = EpisodeStatus::max_steps;
  std::size_t interventions = 0;
  std::size_t failure_states = 0;  // visited states with level <= 0
  double min_level = std::numeric_limits<double>::infinity();
  std::string message;
};

// Filter parameters shared by every scenario.
struct FilterSettings {
  bool enabled = true;
  SamplerKind kind = SamplerKind::svgd;
  SvgdConfig svgd;
  CemConfig cem;
  std::size_t samples = 757;  // N
  std::size_t horizon = 20;
  CostConfig cost{};
  std::size_t workers = 1;
  std::size_t init_attempts = 10;
};

// Sampler defaults. Particle count, iterations, alpha and step size are the
// published ones; the covariances and K were picked by hand on the two-gap
// layout. CEM starts from the same spread as the SVGD prior.
inline SvgdConfig robot_svgd_defaults() {
  SvgdConfig c;
  c.prior_cov = {4.0, 4.0};
  c.perturbation_cov = {0.01, 0.01};
  c.perturbations = 64;
  return c;
}

inline SvgdConfig vehicle_svgd_defaults(std::size_t vehicles) {
  SvgdConfig c;
  c.step_size = 0.15;
  c.prior_cov.assign(vehicles, 1.0);
  c.perturbation_cov.assign(vehicles, 0.05);
  c.perturbations = 16;
  return c;
}

inline CemConfig cem_defaults(const SvgdConfig& matching) {
  CemConfig c;
  c.init_cov = matching.prior_cov;
  return c;
}

inline FilterSettings robot_filter_defaults(SamplerKind kind = SamplerKind::svgd) {
  FilterSettings fs;
  fs.kind = kind;
  fs.svgd = robot_svgd_defaults();
  fs.cem = cem_defaults(fs.svgd);
  fs.horizon = 20;
  return fs;
}

inline FilterSettings vehicle_filter_defaults(std::size_t vehicles, SamplerKind kind = SamplerKind::svgd) {
  FilterSettings fs;
  fs.kind = kind;
  fs.svgd = vehicle_svgd_defaults(vehicles);
  fs.cem = cem_defaults(fs.svgd);
  fs.horizon = 67;
  return fs;
}

// ---------------------------------------------------------------------------
// Generic closed loop

// Runs nominal -> filter -> plant until `done(x)` or the step cap. With the
// filter disabled the nominal input is applied as is (after clamping).
template <class Problem, class Nominal, class Done>
EpisodeLog run_closed_loop(const Problem& problem, const typename Problem::State& x0, Nominal&& nominal, Done&& done,
                           const FilterSettings& settings, std::size_t max_steps, StreamKey key) {
  using State = typename Problem::State;
  const auto& model = problem.model;
  EpisodeLog log;
  log.state_names = model.state_names();
  log.control_names = model.control_names();
  log.final_state = model.state_values(x0);

  const auto inv = make_stopped_set(problem);
  MixtureSource<Problem> source(problem, settings.kind, settings.svgd, settings.cem, settings.samples);
  FilterState fs;
  if (settings.enabled) {
    try {
      fs = initialize_backup(x0, source, problem, inv, key, settings.init_attempts);
    } catch (const PreconditionError& e) {
      log.status = EpisodeStatus::init_failed;
      log.message = e.what();
      return log;
    } catch (const InitializationError& e) {
      log.status = EpisodeStatus::init_failed;
      log.message = e.what();
      return log;
    }
  }

  State x = x0;
  log.min_level = problem.level(x0);
  log.status = EpisodeStatus::max_steps;
  for (std::size_t t = 0; t < max_steps; ++t) {
    if (done(x)) {
      log.status = EpisodeStatus::goal_reached;
      break;
    }
    StepRecord rec;
    rec.t = t;
    rec.state = model.state_values(x);
    rec.u_nom = nominal(x, key.child(stream_tag::kNominal).child(t));
    if (settings.enabled) {
      auto r = filter_step(x, rec.u_nom, fs, source, problem, inv, key);
      rec.u_safe = std::move(r.applied);
      rec.decision = r.diagnostics.decision;
      rec.min_cost = r.diagnostics.min_cost;
      rec.safe_count = r.diagnostics.safe_count;
      fs = std::move(r.state);
    } else {
      rec.u_safe = rec.u_nom;
      clamp_to_bounds(model, std::span<double>(rec.u_safe));
      rec.min_cost = std::numeric_limits<double>::quiet_NaN();
    }
    if (rec.decision == Decision::intervene) ++log.interventions;
    x = model.step(x, rec.u_safe);
    log.steps.push_back(std::move(rec));

    const double l = problem.level(x);
    log.min_level = std::min(log.min_level, l);
    if (!(l > 0.0)) {
      ++log.failure_states;
      log.status = EpisodeStatus::failure_entered;
      break;
    }
  }
  if (log.status == EpisodeStatus::max_steps && done(x)) log.status = EpisodeStatus::goal_reached;
  log.final_state = model.state_values(x);
  return log;
}

// ---------------------------------------------------------------------------
// Single robot

using RobotProblem = SafetyProblem<UnicycleModel, ObstacleField, TerminalStopProjection>;

struct SingleRobotScenario {
  UnicycleState start{};
  Point2 goal{3.0, 0.0};
  std::vector<CircleObstacle> obstacles;
  double robot_radius = 0.1;
  double level_scale = 1000.0;
  double goal_radius = 0.15;
  std::size_t max_steps = 600;
  UnicycleLimits limits{};
};

// A central post with a wall of discs above and below it, leaving one narrow
// gap on each side. Start left of it, goal right of it.
inline std::vector<CircleObstacle> two_gap_obstacles(double x = 1.5, double center_r = 0.3, double wall_y = 0.8,
                                                     double wall_r = 0.15, int wall_discs = 6) {
  std::vector<CircleObstacle> out{{{x, 0.0}, center_r}};
  for (int i = 0; i < wall_discs; ++i) {
    const double y = wall_y + 2.0 * wall_r * i;
    out.push_back({{x, y}, wall_r});
    out.push_back({{x, -y}, wall_r});
  }
  return out;
}

inline RobotProblem make_robot_problem(const SingleRobotScenario& sc, const FilterSettings& fs) {
  RobotProblem p{UnicycleModel(sc.limits), ObstacleField(sc.obstacles, sc.robot_radius, sc.level_scale)};
  p.cost = fs.cost;
  p.horizon = fs.horizon;
  p.workers = fs.workers;
  p.cost.validate();
  check_stop_horizon(p.model, p.horizon);
  return p;
}

// One-shot sampling MPC toward a goal, blind to obstacles: Gaussian input
// sequences around a warm-started mean, weighted by exp(-alpha * cost) with
// cost = summed distance to the goal plus a small effort term.
struct GoalMpcConfig {
  std::size_t samples = 128;
  std::size_t horizon = 20;
  double alpha = 2.0;
  std::vector<double> cov{0.5, 0.5};
  double effort = 0.01;
  bool warm_start = true;
};

class GoalMpc {
 public:
  GoalMpc(UnicycleModel model, Point2 goal, GoalMpcConfig cfg)
      : model_(model), goal_(goal), cfg_(std::move(cfg)), mean_(Vector::Zero(static_cast<Eigen::Index>(cfg_.horizon * 2))) {
    if (cfg_.samples < 1 || cfg_.horizon < 1 || cfg_.cov.size() != 2 || !(cfg_.alpha > 0.0)) {
      throw std::invalid_argument("goal mpc: bad configuration");
    }
  }

  std::vector<double> operator()(const UnicycleState& x, StreamKey key) {
    const Vector sd = tile(cfg_.cov, cfg_.horizon).cwiseSqrt();
    const auto dim = mean_.size();
    std::vector<ControlSequence> seqs(cfg_.samples);
    std::vector<double> costs(cfg_.samples);
    for (std::size_t i = 0; i < cfg_.samples; ++i) {
      RandomStream rng(key, static_cast<std::uint32_t>(i));
      Vector raw(dim);
      for (Eigen::Index d = 0; d < dim; ++d) raw[d] = mean_[d] + sd[d] * rng.normal();
      seqs[i] = ControlSequence(std::move(raw), 2);
      clamp_to_bounds(model_, seqs[i]);
      costs[i] = cost(x, seqs[i]);
    }
    const auto w = compute_weights(costs, cfg_.alpha);
    Vector mean = Vector::Zero(dim);
    for (std::size_t i = 0; i < cfg_.samples; ++i) mean += w[i] * seqs[i].flat();
    std::vector<double> u{mean[0], mean[1]};
    if (cfg_.warm_start) {
      mean_.head(dim - 2) = mean.tail(dim - 2);
      mean_.tail(2).setZero();
    }
    return u;
  }

  void reset() { mean_.setZero(); }

 private:
  [[nodiscard]] double cost(UnicycleState x, const ControlSequence& seq) const {
    double c = 0.0;
    for (std::size_t k = 0; k < seq.horizon(); ++k) {
      x = model_.step(x, seq.input(k));
      c += std::hypot(x.x - goal_.x, x.y - goal_.y);
      c += cfg_.effort * (seq(k, 0) * seq(k, 0) + seq(k, 1) * seq(k, 1));
    }
    return c;
  }

  UnicycleModel model_;
  Point2 goal_;
  GoalMpcConfig cfg_;
  Vector mean_;
};

// Stateless stress nominal: full throttle, steering at the nearest obstacle.
inline std::vector<double> nominal_adversarial(const UnicycleState& x, const ObstacleField& field, double gain = 3.0) {
  const auto& o = field.obstacles()[field.nearest({x.x, x.y})];
  const double bearing = std::atan2(o.center.y - x.y, o.center.x - x.x) - x.theta;
  return {gain * std::remainder(bearing, 2.0 * std::numbers::pi), 1.0};
}

inline EpisodeLog run_single_robot(const SingleRobotScenario& sc, const FilterSettings& settings,
                                   const GoalMpcConfig& nominal_cfg, StreamKey key) {
  const auto problem = make_robot_problem(sc, settings);
  GoalMpc mpc(problem.model, sc.goal, nominal_cfg);
  auto done = [&](const UnicycleState& x) { return std::hypot(x.x - sc.goal.x, x.y - sc.goal.y) <= sc.goal_radius; };
  return run_closed_loop(problem, sc.start, mpc, done, settings, sc.max_steps, key);
}

inline EpisodeLog run_single_robot_adversarial(const SingleRobotScenario& sc, const FilterSettings& settings,
                                               std::size_t steps, StreamKey key) {
  const auto problem = make_robot_problem(sc, settings);
  auto nominal = [&](const UnicycleState& x, StreamKey) { return nominal_adversarial(x, problem.level); };
  auto never = [](const UnicycleState&) { return false; };
  return run_closed_loop(problem, sc.start, nominal, never, settings, steps, key);
}

// ---------------------------------------------------------------------------
// Restrictiveness sweep

struct SweepGrid {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  double step = 0.01;
  double v = 1.0;
  double theta = 0.0;

  [[nodiscard]] std::size_t nx() const { return count(x_min, x_max); }
  [[nodiscard]] std::size_t ny() const { return count(y_min, y_max); }
  [[nodiscard]] double x_at(std::size_t i) const { return x_min + step * static_cast<double>(i); }
  [[nodiscard]] double y_at(std::size_t j) const { return y_min + step * static_cast<double>(j); }

  void validate() const {
    if (!(step > 0.0) || !(x_max >= x_min) || !(y_max >= y_min)) throw std::invalid_argument("sweep grid: bad extent");
  }

 private:
  [[nodiscard]] std::size_t count(double lo, double hi) const {
    return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  }
};

struct SweepCell {
  std::size_t ix = 0, iy = 0;
  double x = 0.0, y = 0.0;
  bool intervened = false;
  double min_cost = 0.0;
  std::size_t safe_samples = 0;  // among the N decision samples
  SafeSampleRate rate;           // filled only when intervened
};

struct SweepResult {
  SweepGrid grid;
  std::size_t samples = 0;
  std::size_t rate_trials = 0;
  std::vector<SweepCell> cells;  // feasible cells only, row-major in (iy, ix)
  std::size_t num_intervened = 0;
  double max_safe_sample_rate = 0.0;
};

inline void aggregate(SweepResult& r) {
  r.num_intervened = 0;
  r.max_safe_sample_rate = 0.0;
  for (const auto& c : r.cells) {
    if (!c.intervened) continue;
    ++r.num_intervened;
    r.max_safe_sample_rate = std::max(r.max_safe_sample_rate, c.rate.rate);
  }
}

// Every feasible grid cell (outside the dilated obstacles) is treated as the
// predicted state x_{t+1}: build the distribution there, draw N candidates,
// decide once. Intervened cells get a Monte Carlo safe-sample rate on the
// same distribution. Cells run in parallel; each owns key.child(cell index).
inline SweepResult run_sweep(const SingleRobotScenario& sc, const FilterSettings& settings, const SweepGrid& grid,
                             std::size_t rate_trials, StreamKey key) {
  grid.validate();
  auto problem = make_robot_problem(sc, settings);
  const std::size_t cell_workers = problem.workers;
  problem.workers = 1;

  const std::size_t nx = grid.nx(), ny = grid.ny();
  std::vector<SweepCell> all(nx * ny);
  std::vector<std::uint8_t> feasible(nx * ny, 0);
  parallel_for(nx * ny, cell_workers, [&](std::size_t idx) {
    SweepCell& cell = all[idx];
    cell.ix = idx % nx;
    cell.iy = idx / nx;
    cell.x = grid.x_at(cell.ix);
    cell.y = grid.y_at(cell.iy);
    const UnicycleState s{cell.x, cell.y, grid.theta, grid.v};
    if (!(problem.level(s) > 0.0)) return;
    feasible[idx] = 1;
    const StreamKey ck = key.child(stream_tag::kScenario).child(idx);
    MixtureSource<RobotProblem> source(problem, settings.kind, settings.svgd, settings.cem, settings.samples);
    const auto cands = source.draw(s, ck);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& seq : cands.sequences) {
      const double c = problem.cost_of(s, seq);
      best = std::min(best, c);
      if (c < 0.0) ++cell.safe_samples;
    }
    cell.min_cost = best;
    cell.intervened = !(best < 0.0);
    if (cell.intervened && rate_trials > 0) {
      cell.rate = estimate_safe_sample_rate(s, *cands.distribution, rate_trials, problem,
                                            ck.child(stream_tag::kRateEstimate));
    }
  });

  SweepResult r;
  r.grid = grid;
  r.samples = settings.samples;
  r.rate_trials = rate_trials;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (feasible[i]) r.cells.push_back(all[i]);
  }
  aggregate(r);
  return r;
}

// ---------------------------------------------------------------------------
// Intersection

using CrossingProblem = SafetyProblem<IntersectionModel, IntersectionLevel, TerminalStopProjection>;

struct VehicleSpec {
  Approach from = Approach::south;
  Approach to = Approach::north;
  double entry_time = 0.0;  // seconds behind the approach start at the initial speed
};

struct IntersectionScenario {
  IntersectionLayout layout{};
  Footprint footprint{};
  VehicleLimits limits{};
  std::vector<VehicleSpec> vehicles;
  double initial_speed = 10.0;
  double target_speed = 10.0;
  double gain = 1.0;
  double level_scale = 100.0;
  double free_distance = 100.0;
  std::size_t max_steps = 400;
};

// Late entries become extra straight road behind the approach, so every
// vehicle starts at s = 0 with the initial speed and enters the approach
// entry_time seconds later.
inline IntersectionScene make_scene(const IntersectionScenario& sc) {
  IntersectionScene scene;
  scene.footprint = sc.footprint;
  for (const auto& v : sc.vehicles) {
    if (!(v.entry_time >= 0.0)) throw std::invalid_argument("vehicle entry time must be >= 0");
    scene.paths.push_back(make_crossing_path(sc.layout, v.from, v.to, v.entry_time * sc.initial_speed));
  }
  return scene;
}

inline CrossingProblem make_crossing_problem(const IntersectionScenario& sc, const FilterSettings& fs) {
  if (sc.vehicles.empty() || sc.vehicles.size() > kMaxVehicles) throw std::invalid_argument("intersection: bad vehicle count");
  CrossingProblem p{IntersectionModel(sc.vehicles.size(), sc.limits),
                    IntersectionLevel(make_scene(sc), sc.level_scale, sc.free_distance)};
  p.cost = fs.cost;
  p.horizon = fs.horizon;
  p.workers = fs.workers;
  p.cost.validate();
  check_stop_horizon(p.model, p.horizon);
  return p;
}

inline IntersectionState initial_state(const IntersectionScenario& sc) {
  IntersectionState x;
  x.count = sc.vehicles.size();
  for (std::size_t i = 0; i < x.count; ++i) x.vehicles[i] = {0.0, sc.initial_speed};
  return x;
}

// Per-vehicle proportional speed tracking, blind to the other vehicles.
inline std::vector<double> nominal_target_speed(const IntersectionState& x, double target, double gain,
                                                double accel_max) {
  std::vector<double> u(x.count);
  for (std::size_t i = 0; i < x.count; ++i) u[i] = std::clamp(gain * (target - x.vehicles[i].v), -accel_max, accel_max);
  return u;
}

inline EpisodeLog run_intersection(const IntersectionScenario& sc, const FilterSettings& settings, StreamKey key) {
  const auto problem = make_crossing_problem(sc, settings);
  const auto x0 = initial_state(sc);
  auto nominal = [&](const IntersectionState& x, StreamKey) {
    return nominal_target_speed(x, sc.target_speed, sc.gain, sc.limits.accel_max);
  };
  auto done = [&](const IntersectionState& x) {
    for (std::size_t i = 0; i < x.count; ++i) {
      if (!problem.level.exited(x, i)) return false;
    }
    return true;
  };
  return run_closed_loop(problem, x0, nominal, done, settings, sc.max_steps, key);
}

// Random crossing case: approach uniform, destination uniform among the other
// three, entry time uniform in [0, max_entry]. Same-approach vehicles closer
// than min_headway seconds would start overlapping; such draws are redrawn.
inline IntersectionScenario random_intersection_case(IntersectionScenario base, std::size_t vehicles,
                                                     double max_entry, double min_headway, StreamKey key) {
  base.vehicles.clear();
  for (std::uint32_t attempt = 0;; ++attempt) {
    RandomStream rng(key, attempt);
    std::vector<VehicleSpec> vs(vehicles);
    for (auto& v : vs) {
      const auto from = static_cast<int>(rng.next_u32() % 4);
      const auto offset = 1 + static_cast<int>(rng.next_u32() % 3);
      v.from = static_cast<Approach>(from);
      v.to = static_cast<Approach>((from + offset) % 4);
      v.entry_time = max_entry * rng.uniform();
    }
    bool ok = true;
    for (std::size_t i = 0; i < vehicles && ok; ++i) {
      for (std::size_t j = i + 1; j < vehicles && ok; ++j) {
        if (vs[i].from == vs[j].from && std::abs(vs[i].entry_time - vs[j].entry_time) < min_headway) ok = false;
      }
    }
    if (ok) {
      base.vehicles = std::move(vs);
      return base;
    }
  }
}

}  // namespace sbsf
