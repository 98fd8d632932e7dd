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

#include "sbsf/safety.hpp"
#include "sbsf/sequence.hpp"

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sbsf {

// Identity projection: sequences are only clamped to the input bounds.
struct NoProjection {
  template <class Model>
  void operator()(const Model&, const typename Model::State&, ControlSequence&) const noexcept {}
};

// Everything needed to score a control sequence from a start state: dynamics,
// failure set, cost flavour, horizon, and the projection applied to every
// candidate before it is rolled out.
template <SystemModel Model, LevelFunction<typename Model::State> Level, class Projection = NoProjection>
struct SafetyProblem {
  using State = typename Model::State;

  Model model;
  Level level;
  CostConfig cost{};
  std::size_t horizon = 20;
  Projection projection{};
  std::size_t workers = 1;

  [[nodiscard]] std::size_t flat_dim() const { return horizon * model.control_dim(); }

  // Clamp to bounds, then project.
  [[nodiscard]] ControlSequence admissible(Vector raw, const State& start) const {
    if (static_cast<std::size_t>(raw.size()) != flat_dim()) throw std::invalid_argument("sequence size mismatch");
    ControlSequence seq(std::move(raw), model.control_dim());
    clamp_to_bounds(model, seq);
    projection(model, start, seq);
    return seq;
  }

  [[nodiscard]] double cost_of(const State& start, const ControlSequence& seq) const {
    return rollout_cost(model, start, seq, level, cost);
  }

  // Cost of a raw (unclamped, unprojected) sequence as the filter would execute it.
  [[nodiscard]] double raw_cost(const State& start, const Vector& raw) const {
    return cost_of(start, admissible(raw, start));
  }
};

// Tiles per-input-dimension values across the horizon into a flat vector.
inline Vector tile(const std::vector<double>& per_dim, std::size_t horizon) {
  Vector out(static_cast<Eigen::Index>(per_dim.size() * horizon));
  for (std::size_t k = 0; k < horizon; ++k) {
    for (std::size_t d = 0; d < per_dim.size(); ++d) out[static_cast<Eigen::Index>(k * per_dim.size() + d)] = per_dim[d];
  }
  return out;
}

}  // namespace sbsf
