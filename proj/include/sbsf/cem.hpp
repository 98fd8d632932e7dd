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
#include "sbsf/problem.hpp"
#include "sbsf/rng.hpp"
#include "sbsf/svgd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sbsf {

struct CemConfig {
  std::size_t population = 0;  // 0 means "use the filter sample count N"
  double elite_frac = 0.1;
  std::size_t iterations = 5;
  std::vector<double> init_cov;  // per input dimension
  double cov_floor = 1e-3;

  [[nodiscard]] std::size_t elite_count(std::size_t pop) const {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(pop) * elite_frac - 1e-12));
  }

  void validate(std::size_t control_dim, std::size_t pop) const {
    if (!(elite_frac > 0.0 && elite_frac <= 1.0)) throw std::invalid_argument("cem: elite_frac must be in (0, 1]");
    if (pop < 1 || elite_count(pop) < 1) throw std::invalid_argument("cem: population * elite_frac must be >= 1");
    if (!(cov_floor > 0.0)) throw std::invalid_argument("cem: cov_floor must be positive");
    if (init_cov.size() != control_dim) throw std::invalid_argument("cem: init_cov has wrong length");
    for (double v : init_cov) {
      if (!(v > 0.0)) throw std::invalid_argument("cem: init_cov must be positive");
    }
  }
};

// Cross-entropy refinement of a diagonal Gaussian, returned as a
// one-component mixture so the filter can sample it like the SVGD mixture.
// Elites are the lowest-cost samples; ties keep sample order.
template <class Problem>
GaussianMixture cem_build(const typename Problem::State& start, const Problem& problem, const CemConfig& cfg,
                          std::size_t population, StreamKey key) {
  const Eigen::Index dim = static_cast<Eigen::Index>(problem.flat_dim());
  Vector mean = Vector::Zero(dim);
  Vector var = tile(cfg.init_cov, problem.horizon);
  const std::size_t n_elite = cfg.elite_count(population);

  std::vector<Vector> samples(population);
  std::vector<double> costs(population);
  std::vector<std::size_t> order(population);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const StreamKey iter_key = key.child(stream_tag::kCem).child(it);
    const Vector sd = var.cwiseSqrt();
    parallel_for(population, problem.workers, [&](std::size_t j) {
      RandomStream rng(iter_key, static_cast<std::uint32_t>(j));
      samples[j].resize(dim);
      for (Eigen::Index d = 0; d < dim; ++d) samples[j][d] = mean[d] + sd[d] * rng.normal();
      costs[j] = problem.raw_cost(start, samples[j]);
    });
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });

    mean.setZero();
    for (std::size_t e = 0; e < n_elite; ++e) mean += samples[order[e]];
    mean /= static_cast<double>(n_elite);
    var.setZero();
    for (std::size_t e = 0; e < n_elite; ++e) var += (samples[order[e]] - mean).cwiseAbs2();
    var /= static_cast<double>(n_elite);
    var = var.cwiseMax(cfg.cov_floor);
  }

  GaussianMixture q;
  q.means.push_back(std::move(mean));
  q.variance = std::move(var);
  q.weights = {1.0};
  return q;
}

}  // namespace sbsf
