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
#include "sbsf/sequence.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbsf {

inline constexpr std::size_t kMaxVehicles = 8;

struct VehicleState {
  double s = 0.0;  // arc length along the vehicle's path, m
  double v = 0.0;  // m/s

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct IntersectionState {
  std::array<VehicleState, kMaxVehicles> vehicles{};
  std::size_t count = 0;

  [[nodiscard]] std::span<const VehicleState> active() const noexcept { return {vehicles.data(), count}; }
  friend bool operator==(const IntersectionState& a, const IntersectionState& b) {
    if (a.count != b.count) return false;
    for (std::size_t i = 0; i < a.count; ++i) {
      if (!(a.vehicles[i] == b.vehicles[i])) return false;
    }
    return true;
  }
};

struct VehicleLimits {
  double dt = 0.1;
  double accel_max = 1.5;
  double v_max = 10.0;
};

// Longitudinal double integrator per vehicle along a fixed path. The joint
// control input is one acceleration per vehicle.
class IntersectionModel {
 public:
  using State = IntersectionState;

  IntersectionModel(std::size_t vehicles, const VehicleLimits& limits) : limits_(limits), count_(vehicles) {
    if (vehicles == 0 || vehicles > kMaxVehicles) throw std::invalid_argument("intersection model: bad vehicle count");
    if (!(limits.dt > 0.0) || !(limits.accel_max > 0.0) || !(limits.v_max > 0.0)) {
      throw std::invalid_argument("vehicle limits must be positive");
    }
    lower_.assign(vehicles, -limits.accel_max);
    upper_.assign(vehicles, limits.accel_max);
  }

  [[nodiscard]] std::size_t control_dim() const noexcept { return count_; }
  [[nodiscard]] std::size_t vehicle_count() const noexcept { return count_; }
  [[nodiscard]] double dt() const noexcept { return limits_.dt; }
  [[nodiscard]] const VehicleLimits& limits() const noexcept { return limits_; }
  [[nodiscard]] std::span<const double> control_lower() const noexcept { return lower_; }
  [[nodiscard]] std::span<const double> control_upper() const noexcept { return upper_; }

  [[nodiscard]] VehicleState step_vehicle(const VehicleState& x, double accel) const {
    if (!std::isfinite(x.s) || !std::isfinite(x.v) || !std::isfinite(accel)) {
      throw std::invalid_argument("vehicle step: non-finite state or input");
    }
    const double a = std::clamp(accel, -limits_.accel_max, limits_.accel_max);
    return {x.s + x.v * limits_.dt, std::clamp(x.v + a * limits_.dt, 0.0, limits_.v_max)};
  }

  [[nodiscard]] State step(const State& x, std::span<const double> u) const {
    if (x.count != count_) throw std::invalid_argument("intersection step: vehicle count mismatch");
    State n;
    n.count = count_;
    for (std::size_t i = 0; i < count_; ++i) n.vehicles[i] = step_vehicle(x.vehicles[i], u[i]);
    return n;
  }

  [[nodiscard]] bool is_stopped(const State& x) const noexcept {
    for (std::size_t i = 0; i < x.count; ++i) {
      if (x.vehicles[i].v != 0.0) return false;
    }
    return true;
  }
  [[nodiscard]] std::size_t stop_steps(double v) const noexcept {
    return braking_steps(v, limits_.accel_max, limits_.dt);
  }
  [[nodiscard]] std::size_t max_stop_steps() const noexcept { return stop_steps(limits_.v_max); }

  void enforce_stop(const State& x, std::span<double> u, std::size_t steps_left) const {
    for (std::size_t i = 0; i < count_; ++i) {
      u[i] = std::clamp(u[i], -limits_.accel_max, limits_.accel_max);
      const double v_next = std::clamp(x.vehicles[i].v + u[i] * limits_.dt, 0.0, limits_.v_max);
      if (stop_steps(v_next) > steps_left) u[i] = -limits_.accel_max;
    }
  }

  void invariance_input(const State&, std::span<double> u) const noexcept {
    for (auto& a : u) a = 0.0;
  }

  [[nodiscard]] std::vector<std::string> state_names() const {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < count_; ++i) {
      names.push_back("s" + std::to_string(i));
      names.push_back("v" + std::to_string(i));
    }
    return names;
  }
  [[nodiscard]] std::vector<std::string> control_names() const {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < count_; ++i) names.push_back("a" + std::to_string(i));
    return names;
  }
  [[nodiscard]] static std::vector<double> state_values(const State& x) {
    std::vector<double> values;
    for (std::size_t i = 0; i < x.count; ++i) {
      values.push_back(x.vehicles[i].s);
      values.push_back(x.vehicles[i].v);
    }
    return values;
  }

 private:
  VehicleLimits limits_;
  std::size_t count_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

// ---------------------------------------------------------------------------
// Four-way single-lane crossing, right-hand traffic.

enum class Approach { south = 0, east = 1, north = 2, west = 3 };

inline Approach parse_approach(const std::string& name) {
  if (name == "south") return Approach::south;
  if (name == "east") return Approach::east;
  if (name == "north") return Approach::north;
  if (name == "west") return Approach::west;
  throw std::invalid_argument("unknown approach '" + name + "'");
}

inline const char* to_string(Approach a) {
  static constexpr std::array<const char*, 4> names{"south", "east", "north", "west"};
  return names[static_cast<std::size_t>(a)];
}

struct IntersectionLayout {
  double lane_width = 4.0;       // m; the crossing box is two lanes wide
  double approach_length = 50.0; // m from path start to the box edge
  double exit_length = 30.0;     // m beyond the box edge
};

struct Footprint {
  double length = 4.0;
  double width = 2.0;
};

// Path from `from` to `to` (the side the vehicle leaves through). `lead_in`
// extends the approach backwards, which is how entry delays are encoded.
inline Path make_crossing_path(const IntersectionLayout& layout, Approach from, Approach to, double lead_in = 0.0) {
  if (from == to) throw std::invalid_argument("crossing path: U-turns are not supported");
  if (lead_in < 0.0) throw std::invalid_argument("crossing path: negative lead-in");
  const double lw = layout.lane_width;
  const double box = lw;  // half-size of the crossing square
  const double rot = 0.5 * std::numbers::pi * static_cast<double>(from);
  const double c = std::cos(rot);
  const double s = std::sin(rot);
  // Southern approach frame: start on the northbound lane heading +y.
  const Point2 local{0.5 * lw, -(box + layout.approach_length + lead_in)};
  const Point2 start{c * local.x - s * local.y, s * local.x + c * local.y};
  Path path(Pose2{start, 0.5 * std::numbers::pi + rot});
  path.line(layout.approach_length + lead_in);
  const int turn = (static_cast<int>(to) - static_cast<int>(from) + 4) % 4;
  if (turn == 2) {
    path.line(2.0 * box + layout.exit_length);
  } else if (turn == 1) {
    path.arc(0.5 * lw, -0.5 * std::numbers::pi).line(layout.exit_length);
  } else {
    path.arc(1.5 * lw, 0.5 * std::numbers::pi).line(layout.exit_length);
  }
  return path;
}

struct IntersectionScene {
  std::vector<Path> paths;  // one per vehicle, indexed like the state
  Footprint footprint;
};

// Footprint of vehicle `index` at arc length `s` on its path.
inline OrientedRect pose_of(std::size_t index, double s, const IntersectionScene& scene) {
  if (index >= scene.paths.size()) throw std::invalid_argument("pose_of: unknown vehicle index");
  const Pose2 p = scene.paths[index].pose_at(s);
  return {p.position, p.heading, scene.footprint.length, scene.footprint.width};
}

}  // namespace sbsf
