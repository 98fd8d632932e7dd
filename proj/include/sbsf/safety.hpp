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

#include "sbsf/geometry.hpp"
#include "sbsf/intersection.hpp"
#include "sbsf/sequence.hpp"
#include "sbsf/unicycle.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace sbsf {

// Signed safety margin over states: l(x) <= 0 is the failure set.
template <class L, class State>
concept LevelFunction = requires(const L& l, const State& x) {
  { l(x) } -> std::convertible_to<double>;
};

struct CircleObstacle {
  Point2 center;
  double radius = 0.1;
};

// Circular obstacles around a disc robot:
// l(x) = scale * min_i (|p - c_i| - (r_robot + r_i)).
class ObstacleField {
 public:
  ObstacleField(std::vector<CircleObstacle> obstacles, double robot_radius, double scale = 1000.0)
      : obstacles_(std::move(obstacles)), robot_radius_(robot_radius), scale_(scale) {
    if (obstacles_.empty()) throw std::invalid_argument("obstacle field needs at least one obstacle");
    if (!(robot_radius > 0.0) || !(scale > 0.0)) throw std::invalid_argument("obstacle field: radius and scale must be positive");
    for (const auto& o : obstacles_) {
      if (!(o.radius > 0.0)) throw std::invalid_argument("obstacle radius must be positive");
    }
  }

  [[nodiscard]] double clearance(Point2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles_) best = std::min(best, norm(p - o.center) - (robot_radius_ + o.radius));
    return best;
  }

  double operator()(const UnicycleState& s) const {
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw std::invalid_argument("level: non-finite position");
    return scale_ * clearance({s.x, s.y});
  }

  // Index of the obstacle with the smallest clearance from p.
  [[nodiscard]] std::size_t nearest(Point2 p) const {
    std::size_t idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      const double c = norm(p - obstacles_[i].center) - obstacles_[i].radius;
      if (c < best) {
        best = c;
        idx = i;
      }
    }
    return idx;
  }

  [[nodiscard]] const std::vector<CircleObstacle>& obstacles() const noexcept { return obstacles_; }
  [[nodiscard]] double robot_radius() const noexcept { return robot_radius_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }

 private:
  std::vector<CircleObstacle> obstacles_;
  double robot_radius_;
  double scale_;
};

// Multi-vehicle level: scale * d when the minimum pairwise footprint
// distance d is positive, -scale otherwise. Vehicles past the end of their
// path have left the scene and are ignored; with fewer than two vehicles
// left the level is scale * free_distance.
class IntersectionLevel {
 public:
  IntersectionLevel(IntersectionScene scene, double scale = 100.0, double free_distance = 100.0)
      : scene_(std::move(scene)), scale_(scale), free_distance_(free_distance) {
    if (scene_.paths.empty()) throw std::invalid_argument("intersection level needs at least one vehicle");
    if (!(scale > 0.0) || !(free_distance > 0.0)) throw std::invalid_argument("intersection level: bad scale");
    for (const auto& p : scene_.paths) lengths_.push_back(p.length());
  }

  // Minimum pairwise footprint distance among vehicles still in the scene.
  [[nodiscard]] double min_distance(const IntersectionState& x) const {
    if (x.count != scene_.paths.size()) throw std::invalid_argument("intersection level: vehicle count mismatch");
    std::array<OrientedRect, kMaxVehicles> rects{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.count; ++i) {
      if (!std::isfinite(x.vehicles[i].s)) throw std::invalid_argument("level: non-finite vehicle state");
      if (x.vehicles[i].s > lengths_[i]) continue;
      rects[n++] = pose_of(i, x.vehicles[i].s, scene_);
    }
    if (n < 2) return free_distance_;
    const double r2 = 2.0 * rects[0].circumradius();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        // Circumscribed circles bound the distance from below.
        if (norm(rects[i].center - rects[j].center) - r2 >= best) continue;
        best = std::min(best, polygon_distance(rects[i], rects[j]));
      }
    }
    return best;
  }

  double operator()(const IntersectionState& x) const {
    const double d = min_distance(x);
    return d > 0.0 ? scale_ * d : -scale_;
  }

  [[nodiscard]] const IntersectionScene& scene() const noexcept { return scene_; }
  [[nodiscard]] bool exited(const IntersectionState& x, std::size_t i) const { return x.vehicles[i].s > lengths_[i]; }

 private:
  IntersectionScene scene_;
  std::vector<double> lengths_;
  double scale_;
  double free_distance_;
};

enum class CostMode { plain, cbf };

struct CostConfig {
  CostMode mode = CostMode::plain;
  double gamma = 0.0;  // decay rate, cbf mode only

  void validate() const {
    if (mode == CostMode::cbf && !(gamma > 0.0 && gamma < 1.0)) {
      throw std::invalid_argument("cbf cost requires gamma in (0, 1)");
    }
  }
};

// Streaming form of the trajectory cost; feed level values in time order.
class CostAccumulator {
 public:
  explicit CostAccumulator(const CostConfig& cfg) : cfg_(cfg) {}

  void add(double level) {
    if (cfg_.mode == CostMode::plain) {
      cost_ = std::max(cost_, -level);
    } else if (has_prev_) {
      cost_ = std::max(cost_, -level + (1.0 - cfg_.gamma) * prev_);
    }
    prev_ = level;
    has_prev_ = true;
  }
  [[nodiscard]] double value() const noexcept { return cost_; }

 private:
  CostConfig cfg_;
  double cost_ = -std::numeric_limits<double>::infinity();
  double prev_ = 0.0;
  bool has_prev_ = false;
};

// Plain: max_k -l(x_k) over all H+1 states. CBF: max over consecutive
// pairs of -l(x_{k+1}) + (1 - gamma) l(x_k), k in [0, H-1].
inline double trajectory_cost(std::span<const double> levels, const CostConfig& cfg) {
  if (levels.empty() || (cfg.mode == CostMode::cbf && levels.size() < 2)) {
    throw std::invalid_argument("trajectory_cost: not enough states");
  }
  CostAccumulator acc(cfg);
  for (double l : levels) acc.add(l);
  return acc.value();
}

template <class State, LevelFunction<State> Level>
double trajectory_cost(std::span<const State> states, const Level& level, const CostConfig& cfg) {
  std::vector<double> levels;
  levels.reserve(states.size());
  for (const auto& s : states) levels.push_back(level(s));
  return trajectory_cost(std::span<const double>(levels), cfg);
}

template <class State, LevelFunction<State> Level>
double trajectory_cost(const Trajectory<State>& traj, const Level& level, const CostConfig& cfg) {
  return trajectory_cost(std::span<const State>(traj.states), level, cfg);
}

// Safe iff every state of the trajectory is strictly outside the failure set.
template <class State, LevelFunction<State> Level>
bool is_safe(std::span<const State> states, const Level& level) {
  return std::all_of(states.begin(), states.end(), [&](const State& s) { return level(s) > 0.0; });
}

template <class State, LevelFunction<State> Level>
bool is_safe(const Trajectory<State>& traj, const Level& level) {
  return is_safe(std::span<const State>(traj.states), level);
}

// Rolls out and scores in one pass without storing the trajectory.
template <SystemModel Model, LevelFunction<typename Model::State> Level>
double rollout_cost(const Model& model, typename Model::State x, const ControlSequence& seq, const Level& level,
                    const CostConfig& cfg) {
  CostAccumulator acc(cfg);
  acc.add(level(x));
  for (std::size_t k = 0; k < seq.horizon(); ++k) {
    x = model.step(x, seq.input(k));
    acc.add(level(x));
  }
  return acc.value();
}

}  // namespace sbsf
