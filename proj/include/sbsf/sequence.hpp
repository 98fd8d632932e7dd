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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sbsf {

using Vector = Eigen::VectorXd;

// Fixed-horizon control sequence stored flat, input-major:
// element (k, d) lives at k * dim + d.
class ControlSequence {
 public:
  ControlSequence() = default;
  ControlSequence(std::size_t horizon, std::size_t dim)
      : values_(Vector::Zero(static_cast<Eigen::Index>(horizon * dim))), horizon_(horizon), dim_(dim) {}
  ControlSequence(Vector values, std::size_t dim) : values_(std::move(values)), dim_(dim) {
    if (dim == 0 || values_.size() % static_cast<Eigen::Index>(dim) != 0) {
      throw std::invalid_argument("control sequence length is not a multiple of the control dimension");
    }
    horizon_ = static_cast<std::size_t>(values_.size()) / dim;
  }

  [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

  [[nodiscard]] std::span<double> input(std::size_t k) noexcept { return {values_.data() + k * dim_, dim_}; }
  [[nodiscard]] std::span<const double> input(std::size_t k) const noexcept {
    return {values_.data() + k * dim_, dim_};
  }
  double& operator()(std::size_t k, std::size_t d) noexcept { return values_[static_cast<Eigen::Index>(k * dim_ + d)]; }
  double operator()(std::size_t k, std::size_t d) const noexcept {
    return values_[static_cast<Eigen::Index>(k * dim_ + d)];
  }

  [[nodiscard]] const Vector& flat() const noexcept { return values_; }
  [[nodiscard]] Vector& flat() noexcept { return values_; }

  friend bool operator==(const ControlSequence& a, const ControlSequence& b) {
    return a.dim_ == b.dim_ && a.horizon_ == b.horizon_ && a.values_ == b.values_;
  }

 private:
  Vector values_;
  std::size_t horizon_ = 0;
  std::size_t dim_ = 0;
};

template <class M>
concept SystemModel = requires(const M& m, const typename M::State& x, std::span<const double> u) {
  typename M::State;
  { m.control_dim() } -> std::convertible_to<std::size_t>;
  { m.dt() } -> std::convertible_to<double>;
  { m.control_lower() } -> std::convertible_to<std::span<const double>>;
  { m.control_upper() } -> std::convertible_to<std::span<const double>>;
  { m.step(x, u) } -> std::same_as<typename M::State>;
};

// Models that can be braked to rest, which is what the terminal-stop
// projection and the stopped invariant set rely on.
template <class M>
concept StoppableModel = SystemModel<M> &&
    requires(const M& m, const typename M::State& x, std::span<double> u, std::size_t n) {
      { m.is_stopped(x) } -> std::convertible_to<bool>;
      { m.max_stop_steps() } -> std::convertible_to<std::size_t>;
      m.enforce_stop(x, u, n);
      m.invariance_input(x, u);
    };

template <class State>
struct Trajectory {
  std::vector<State> states;  // horizon + 1 entries, states[0] is the start
  ControlSequence controls;
};

template <SystemModel Model>
void clamp_to_bounds(const Model& model, std::span<double> u) {
  const auto lo = model.control_lower();
  const auto hi = model.control_upper();
  for (std::size_t d = 0; d < u.size(); ++d) u[d] = std::clamp(u[d], lo[d], hi[d]);
}

template <SystemModel Model>
void clamp_to_bounds(const Model& model, ControlSequence& seq) {
  for (std::size_t k = 0; k < seq.horizon(); ++k) clamp_to_bounds(model, seq.input(k));
}

template <SystemModel Model>
Trajectory<typename Model::State> rollout(const Model& model, const typename Model::State& start,
                                          const ControlSequence& seq) {
  if (seq.horizon() == 0) throw std::invalid_argument("rollout: horizon must be at least 1");
  if (seq.dim() != model.control_dim()) throw std::invalid_argument("rollout: control dimension mismatch");
  Trajectory<typename Model::State> traj;
  traj.controls = seq;
  traj.states.reserve(seq.horizon() + 1);
  traj.states.push_back(start);
  for (std::size_t k = 0; k < seq.horizon(); ++k) traj.states.push_back(model.step(traj.states.back(), seq.input(k)));
  return traj;
}

template <SystemModel Model>
typename Model::State terminal_state(const Model& model, typename Model::State x, const ControlSequence& seq) {
  for (std::size_t k = 0; k < seq.horizon(); ++k) x = model.step(x, seq.input(k));
  return x;
}

// Number of braking steps needed to bring speed `v` to rest at deceleration
// `decel` with step `dt`. Errs on the side of one extra step near integer
// ratios so that clamped braking always reaches exactly zero.
inline std::size_t braking_steps(double v, double decel, double dt) {
  if (v <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(v / (decel * dt) + 1e-7));
}

}  // namespace sbsf
