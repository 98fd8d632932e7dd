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

#ifndef SBSF_TESTS_SUPPORT_HPP_
#define SBSF_TESTS_SUPPORT_HPP_

#include "sbsf/sequence.hpp"

#include <cstddef>
#include <functional>
#include <utility>

namespace sbsf::test_support {

// Problem stand-in whose cost is an arbitrary function of the flat sequence.
// No dynamics, no clamping; lets sampler tests use closed-form landscapes.
struct SyntheticProblem {
  using State = int;

  std::function<double(const Vector&)> cost;
  std::size_t horizon = 2;
  std::size_t control_dim = 2;
  std::size_t workers = 1;

  [[nodiscard]] std::size_t flat_dim() const { return horizon * control_dim; }
  [[nodiscard]] ControlSequence admissible(Vector raw, const State&) const {
    return ControlSequence(std::move(raw), control_dim);
  }
  [[nodiscard]] double raw_cost(const State&, const Vector& raw) const { return cost(raw); }
};

}  // namespace sbsf::test_support

#endif  // SBSF_TESTS_SUPPORT_HPP_
