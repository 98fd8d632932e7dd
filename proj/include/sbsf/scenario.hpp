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

#include "sbsf/parallel.hpp"
#include "sbsf/rng.hpp"
#include "sbsf/svgd.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbsf {

// (epsilon, beta, N) for the sampling-based restrictiveness certificate.
struct ScenarioParams {
  double epsilon = 0.1;
  double beta = 1e-16;
  std::size_t n = 757;
};

namespace detail {
inline void check_unit_open(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
}
}  // namespace detail

// Smallest N with N >= (2 / epsilon) (ln(1 / beta) + 1).
inline std::size_t required_sample_size(double epsilon, double beta) {
  detail::check_unit_open(epsilon, "epsilon");
  detail::check_unit_open(beta, "beta");
  return static_cast<std::size_t>(std::ceil(2.0 / epsilon * (std::log(1.0 / beta) + 1.0)));
}

// Smallest epsilon certified by n samples at confidence beta.
inline double implied_epsilon(std::size_t n, double beta) {
  if (n < 1) throw std::invalid_argument("implied_epsilon: n must be >= 1");
  detail::check_unit_open(beta, "beta");
  double eps = 2.0 / static_cast<double>(n) * (std::log(1.0 / beta) + 1.0);
  if (eps >= 1.0) return eps;  // n too small to certify anything
  // The closed form can land a few ulps off the true threshold either way.
  while (eps < 1.0 && required_sample_size(eps, beta) > n) eps = std::nextafter(eps, 1.0);
  for (double lower = std::nextafter(eps, 0.0); required_sample_size(lower, beta) <= n;
       lower = std::nextafter(eps, 0.0)) {
    eps = lower;
  }
  return eps;
}

inline ScenarioParams make_scenario(double epsilon, double beta) {
  return {epsilon, beta, required_sample_size(epsilon, beta)};
}

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

// Wilson score interval for a binomial proportion (z = 1.96 for 95%).
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct SafeSampleRate {
  std::size_t safe = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  Interval interval;
};

// Monte Carlo fraction of sequences drawn from q whose cost from `start` is negative.
template <class Problem>
SafeSampleRate estimate_safe_sample_rate(const typename Problem::State& start, const GaussianMixture& q,
                                         std::size_t trials, const Problem& problem, StreamKey key) {
  if (trials < 1) throw std::invalid_argument("estimate_safe_sample_rate: trials must be >= 1");
  const auto samples = sample_mixture(q, trials, problem, start, key);
  std::vector<std::uint8_t> safe(trials, 0);
  parallel_for(trials, problem.workers,
               [&](std::size_t i) { safe[i] = problem.cost_of(start, samples[i]) < 0.0 ? 1 : 0; });
  SafeSampleRate r;
  r.trials = trials;
  for (auto s : safe) r.safe += s;
  r.rate = static_cast<double>(r.safe) / static_cast<double>(trials);
  r.interval = wilson_interval(r.safe, trials);
  return r;
}

}  // namespace sbsf
