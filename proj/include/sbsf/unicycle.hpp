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

#include "sbsf/sequence.hpp"

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbsf {

struct UnicycleState {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad, not wrapped
  double v = 0.0;      // m/s

  friend bool operator==(const UnicycleState&, const UnicycleState&) = default;
};

struct UnicycleLimits {
  double dt = 0.1;
  double omega_max = 1.5;
  double accel_max = 1.0;
  double v_max = 1.0;
};

// Kinematic unicycle with inputs (omega, accel), explicit Euler. The position
// update uses the current speed; speed is clamped to [0, v_max] after the update.
class UnicycleModel {
 public:
  using State = UnicycleState;
  static constexpr std::size_t kControlDim = 2;
  static constexpr std::size_t kOmega = 0;
  static constexpr std::size_t kAccel = 1;

  UnicycleModel() : UnicycleModel(UnicycleLimits{}) {}
  explicit UnicycleModel(const UnicycleLimits& limits) : limits_(limits) {
    if (!(limits.dt > 0.0) || !(limits.omega_max > 0.0) || !(limits.accel_max > 0.0) || !(limits.v_max > 0.0)) {
      throw std::invalid_argument("unicycle limits must be positive");
    }
    lower_ = {-limits.omega_max, -limits.accel_max};
    upper_ = {limits.omega_max, limits.accel_max};
  }

  [[nodiscard]] std::size_t control_dim() const noexcept { return kControlDim; }
  [[nodiscard]] double dt() const noexcept { return limits_.dt; }
  [[nodiscard]] const UnicycleLimits& limits() const noexcept { return limits_; }
  [[nodiscard]] std::span<const double> control_lower() const noexcept { return lower_; }
  [[nodiscard]] std::span<const double> control_upper() const noexcept { return upper_; }

  [[nodiscard]] State step(const State& s, std::span<const double> u) const {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.theta) || !std::isfinite(s.v) ||
        !std::isfinite(u[kOmega]) || !std::isfinite(u[kAccel])) {
      throw std::invalid_argument("unicycle step: non-finite state or input");
    }
    const double omega = std::clamp(u[kOmega], lower_[kOmega], upper_[kOmega]);
    const double accel = std::clamp(u[kAccel], lower_[kAccel], upper_[kAccel]);
    const double dt = limits_.dt;
    State n;
    n.x = s.x + s.v * std::cos(s.theta) * dt;
    n.y = s.y + s.v * std::sin(s.theta) * dt;
    n.theta = s.theta + omega * dt;
    n.v = std::clamp(s.v + accel * dt, 0.0, limits_.v_max);
    return n;
  }

  // --- braking support ---------------------------------------------------

  [[nodiscard]] bool is_stopped(const State& s) const noexcept { return s.v == 0.0; }

  [[nodiscard]] std::size_t stop_steps(double v) const noexcept {
    return braking_steps(v, limits_.accel_max, limits_.dt);
  }
  [[nodiscard]] std::size_t max_stop_steps() const noexcept { return stop_steps(limits_.v_max); }

  // Clamps `u` and, if applying it would leave more than `steps_left`
  // braking steps, replaces the acceleration with full braking. Once braking
  // brings the robot to rest the turn rate is zeroed too.
  void enforce_stop(const State& s, std::span<double> u, std::size_t steps_left) const {
    u[kOmega] = std::clamp(u[kOmega], lower_[kOmega], upper_[kOmega]);
    u[kAccel] = std::clamp(u[kAccel], lower_[kAccel], upper_[kAccel]);
    const double v_next = std::clamp(s.v + u[kAccel] * limits_.dt, 0.0, limits_.v_max);
    if (stop_steps(v_next) <= steps_left) return;
    u[kAccel] = -limits_.accel_max;
    if (std::clamp(s.v - limits_.accel_max * limits_.dt, 0.0, limits_.v_max) == 0.0) u[kOmega] = 0.0;
  }

  void invariance_input(const State&, std::span<double> u) const noexcept {
    u[kOmega] = 0.0;
    u[kAccel] = 0.0;
  }

  // --- logging -----------------------------------------------------------

  [[nodiscard]] static std::vector<std::string> state_names() { return {"x", "y", "theta", "v"}; }
  [[nodiscard]] static std::vector<std::string> control_names() { return {"omega", "accel"}; }
  [[nodiscard]] static std::vector<double> state_values(const State& s) { return {s.x, s.y, s.theta, s.v}; }

 private:
  UnicycleLimits limits_;
  std::array<double, kControlDim> lower_{};
  std::array<double, kControlDim> upper_{};
};

}  // namespace sbsf
