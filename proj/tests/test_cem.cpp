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

#include "sbsf/cem.hpp"
#include "sbsf/problem.hpp"
#include "sbsf/rng.hpp"
#include "sbsf/safety.hpp"
#include "sbsf/svgd.hpp"
#include "sbsf/unicycle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace {

using namespace sbsf;
using test_support::SyntheticProblem;

CemConfig config(std::size_t iters) {
  CemConfig cfg;
  cfg.iterations = iters;
  cfg.init_cov = {1.0, 1.0};
  return cfg;
}

TEST(Cem, ZeroIterationsReturnsInitGaussian) {
  SyntheticProblem p{[](const Vector& x) { return x.sum(); }, 3, 2};
  auto cfg = config(0);
  cfg.init_cov = {0.5, 2.0};
  const auto q = cem_build(0, p, cfg, 50, StreamKey(41));
  ASSERT_EQ(q.means.size(), 1u);
  EXPECT_EQ(q.means[0], Vector::Zero(6));
  EXPECT_EQ(q.variance, tile({0.5, 2.0}, 3));
  EXPECT_EQ(q.weights, std::vector<double>{1.0});
}

TEST(Cem, TiesKeepSampleOrder) {
  SyntheticProblem p{[](const Vector&) { return 2.0; }, 2, 2};
  const auto cfg = config(1);
  const std::size_t pop = 95;  // ceil(9.5) = 10 elites
  ASSERT_EQ(cfg.elite_count(pop), 10u);
  const StreamKey key(42);
  const auto q = cem_build(0, p, cfg, pop, key);
  Vector mean = Vector::Zero(4);
  std::vector<Vector> elites;
  for (std::size_t j = 0; j < 10; ++j) {
    RandomStream rng(key.child(stream_tag::kCem).child(0), static_cast<std::uint32_t>(j));
    Vector s(4);
    for (int d = 0; d < 4; ++d) s[d] = rng.normal();
    elites.push_back(s);
    mean += s;
  }
  mean /= 10.0;
  EXPECT_NEAR((q.means[0] - mean).norm(), 0.0, 1e-14);
  Vector var = Vector::Zero(4);
  for (const auto& s : elites) var += (s - mean).cwiseAbs2();
  var = (var / 10.0).cwiseMax(cfg.cov_floor);
  EXPECT_NEAR((q.variance - var).norm(), 0.0, 1e-14);
}

TEST(Cem, ConvergesTowardQuadraticMinimum) {
  const Vector target = Vector::Constant(6, 3.0);
  SyntheticProblem p{[&](const Vector& x) { return (x - target).squaredNorm(); }, 3, 2};
  double prev = target.norm();
  for (std::size_t it = 1; it <= 5; ++it) {
    // iteration streams are keyed by index, so run k is a prefix of run k + 1
    const auto q = cem_build(0, p, config(it), 200, StreamKey(43));
    const double dist = (q.means[0] - target).norm();
    EXPECT_LT(dist, prev) << "iteration " << it;
    prev = dist;
  }
  EXPECT_LT(prev, 0.5 * target.norm());
}

TEST(Cem, VarianceFloorHolds) {
  SyntheticProblem p{[](const Vector& x) { return x.squaredNorm(); }, 2, 2};
  auto cfg = config(8);
  cfg.cov_floor = 0.02;
  const auto q = cem_build(0, p, cfg, 60, StreamKey(44));
  for (Eigen::Index d = 0; d < q.variance.size(); ++d) EXPECT_GE(q.variance[d], 0.02);
}

TEST(Cem, NoSelectionPressureWithFullEliteFraction) {
  SyntheticProblem p{[](const Vector& x) { return x[0]; }, 4, 2};
  auto cfg = config(1);
  cfg.elite_frac = 1.0;
  const std::size_t pop = 400;
  const auto q = cem_build(0, p, cfg, pop, StreamKey(45));
  const double se = 1.0 / std::sqrt(static_cast<double>(pop));
  for (Eigen::Index d = 0; d < 8; ++d) EXPECT_LE(std::abs(q.means[0][d]), 4 * se) << d;
}

TEST(Cem, OutputFeedsTheMixtureSampler) {
  SafetyProblem<UnicycleModel, ObstacleField> p{UnicycleModel{}, ObstacleField({{{0.6, 0.0}, 0.2}}, 0.1)};
  p.horizon = 8;
  const UnicycleState x0{0, 0, 0, 1};
  const auto q = cem_build(x0, p, config(3), 100, StreamKey(46));
  const auto samples = sample_mixture(q, 30, p, x0, StreamKey(47));
  ASSERT_EQ(samples.size(), 30u);
  for (const auto& s : samples) {
    ASSERT_EQ(s.horizon(), 8u);
    for (std::size_t k = 0; k < 8; ++k) {
      ASSERT_LE(std::abs(s(k, 0)), 1.5);
      ASSERT_LE(std::abs(s(k, 1)), 1.0);
    }
  }
}

TEST(Cem, Determinism) {
  SafetyProblem<UnicycleModel, ObstacleField> p{UnicycleModel{}, ObstacleField({{{0.6, 0.0}, 0.2}}, 0.1)};
  p.horizon = 8;
  const UnicycleState x0{0, 0, 0, 1};
  const auto a = cem_build(x0, p, config(3), 64, StreamKey(48));
  p.workers = 4;
  const auto b = cem_build(x0, p, config(3), 64, StreamKey(48));
  EXPECT_EQ(a.means[0], b.means[0]);
  EXPECT_EQ(a.variance, b.variance);
}

TEST(Cem, Validation) {
  auto cfg = config(1);
  EXPECT_NO_THROW(cfg.validate(2, 10));
  EXPECT_THROW(cfg.validate(3, 10), std::invalid_argument);
  cfg.elite_frac = 0.0;
  EXPECT_THROW(cfg.validate(2, 10), std::invalid_argument);
  cfg.elite_frac = 1.5;
  EXPECT_THROW(cfg.validate(2, 10), std::invalid_argument);
  cfg.elite_frac = 0.1;
  EXPECT_THROW(cfg.validate(2, 0), std::invalid_argument);
}

}  // namespace
