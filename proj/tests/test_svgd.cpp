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

#include "sbsf/problem.hpp"
#include "sbsf/rng.hpp"
#include "sbsf/safety.hpp"
#include "sbsf/svgd.hpp"
#include "sbsf/unicycle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace {

using namespace sbsf;
using test_support::SyntheticProblem;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Sample mean and standard error per coordinate.
struct Moments {
  Vector mean, se;
};
Moments moments(const std::vector<Vector>& xs) {
  const auto n = static_cast<double>(xs.size());
  Vector mean = Vector::Zero(xs[0].size());
  for (const auto& x : xs) mean += x;
  mean /= n;
  Vector var = Vector::Zero(xs[0].size());
  for (const auto& x : xs) var += (x - mean).cwiseAbs2();
  var /= n - 1;
  return {mean, (var / n).cwiseSqrt()};
}

TEST(Kernel, IdentitySymmetryRange) {
  RandomStream rng(StreamKey(21));
  for (int t = 0; t < 200; ++t) {
    Vector a(6), b(6);
    for (int d = 0; d < 6; ++d) a[d] = rng.normal(), b[d] = rng.normal();
    const double h = 0.1 + 5 * rng.uniform();
    EXPECT_EQ(rbf_kernel(a, a, h), 1.0);
    EXPECT_EQ(rbf_kernel(a, b, h), rbf_kernel(b, a, h));
    EXPECT_GT(rbf_kernel(a, b, h), 0.0);
    EXPECT_LT(rbf_kernel(a, b, h), 1.0);
  }
  EXPECT_THROW((void)rbf_kernel(vec({0}), vec({1}), 0.0), std::invalid_argument);
}

TEST(Kernel, MedianHeuristicGivesOneHalfForTwoParticles) {
  const std::vector<Vector> p{vec({0, 0}), vec({1.2, 1.6})};  // distance 2
  const double h = median_bandwidth(p);
  EXPECT_NEAR(h, 4.0 / std::log(2.0), 1e-12);
  EXPECT_NEAR(h, 5.7708, 1e-4);
  EXPECT_NEAR(rbf_kernel(p[0], p[1], h), 0.5, 1e-12);
}

TEST(Bandwidth, HandValues) {
  const std::vector<Vector> three{vec({0}), vec({1}), vec({3})};  // distances 1, 3, 2
  EXPECT_NEAR(median_bandwidth(three), 4.0 / std::log(3.0), 1e-12);
  const std::vector<Vector> same(5, vec({0.3, -1}));
  EXPECT_EQ(median_bandwidth(same), kBandwidthFloor);
  const std::vector<Vector> one{vec({1, 2})};
  EXPECT_EQ(median_bandwidth(one), kBandwidthFloor);
}

TEST(Weights, Examples) {
  const std::vector<double> flat{3, 3, 3, 3};
  for (double w : compute_weights(flat, 0.7)) EXPECT_DOUBLE_EQ(w, 0.25);
  const std::vector<double> pair{0, 7};
  const auto w = compute_weights(pair, 0.3);
  EXPECT_NEAR(w[0] / w[1], std::exp(0.3 * 7), 1e-12);
  const std::vector<double> hand{0, 10};
  const auto h = compute_weights(hand, 0.1);
  const double e = std::exp(1.0);
  EXPECT_NEAR(h[0], e / (1 + e), 1e-15);
  EXPECT_NEAR(h[1], 1 / (1 + e), 1e-15);
  EXPECT_NEAR(h[0], 0.7311, 1e-4);
}

TEST(Weights, NormalisedAndShiftInvariant) {
  RandomStream rng(StreamKey(22));
  const double eps = std::numeric_limits<double>::epsilon();
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 1 + rng.next_u32() % 64;
    std::vector<double> c(m);
    for (auto& x : c) x = 1e4 * rng.normal();
    const double alpha = std::pow(10.0, -3 + 4 * rng.uniform());
    const auto w = compute_weights(c, alpha);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    ASSERT_LE(std::abs(sum - 1.0), 8 * eps);
    for (double x : w) ASSERT_GE(x, 0.0);
    auto shifted = c;
    const double k = 100 * rng.normal();
    for (auto& x : shifted) x += k;
    const auto w2 = compute_weights(shifted, alpha);
    for (std::size_t i = 0; i < m; ++i) ASSERT_NEAR(w[i], w2[i], 1e-12);
  }
}

constexpr std::size_t kEstimates = 10000;

TEST(GradientEstimator, ConstantCostIsZeroMeanAtOrigin) {
  const Vector var = vec({0.5, 0.5, 0.2});
  const auto flat = [](const Vector&) { return 4.0; };
  std::vector<Vector> g(kEstimates);
  for (std::size_t r = 0; r < kEstimates; ++r) {
    g[r] = estimate_likelihood_gradient(Vector::Zero(3), flat, 0.1, var, 16, StreamKey(23).child(r));
  }
  const auto mo = moments(g);
  for (int d = 0; d < 3; ++d) EXPECT_LE(std::abs(mo.mean[d]), 3 * mo.se[d]) << d;
}

TEST(GradientEstimator, ConstantCostLeavesPriorTerm) {
  SyntheticProblem p{[](const Vector&) { return 1.0; }, 2, 2};
  SvgdConfig cfg;
  cfg.prior_cov = {0.5, 2.0};
  cfg.perturbation_cov = {0.1, 0.1};
  const Vector u = vec({1, -1, 2, 0.5});
  std::vector<Vector> g(kEstimates);
  for (std::size_t r = 0; r < kEstimates; ++r) g[r] = grad_log_posterior(u, 0, p, cfg, StreamKey(24).child(r));
  const auto mo = moments(g);
  const Vector expect = vec({-2, 0.5, -4, -0.25});
  for (int d = 0; d < 4; ++d) EXPECT_LE(std::abs(mo.mean[d] - expect[d]), 3 * mo.se[d]) << d;
}

TEST(GradientEstimator, MatchesGaussianSmoothingOracleOnQuadratic) {
  // C(U) = c |U|^2 and eps ~ N(0, s2 I): E[exp(-a C(U + eps))] is proportional to
  // exp(-a c |U|^2 / (1 + 2 a c s2)), so its log-gradient is -2 a c U / (1 + 2 a c s2).
  const double a = 0.5, c = 0.2, s2 = 0.25;
  const Vector u = vec({1.0, -0.5, 0.25});
  const Vector var = Vector::Constant(3, s2);
  const auto quad = [c](const Vector& x) { return c * x.squaredNorm(); };
  std::vector<Vector> g(kEstimates);
  for (std::size_t r = 0; r < kEstimates; ++r) {
    g[r] = estimate_likelihood_gradient(u, quad, a, var, 256, StreamKey(25).child(r));
  }
  const auto mo = moments(g);
  const Vector oracle = -2 * a * c * u / (1 + 2 * a * c * s2);
  for (int d = 0; d < 3; ++d) EXPECT_LE(std::abs(mo.mean[d] - oracle[d]), 3 * mo.se[d]) << d;
  // direction check on the averaged estimate
  EXPECT_GT(mo.mean.normalized().dot(oracle.normalized()), 0.999);
}

TEST(GradientEstimator, NonFiniteCostsIgnored) {
  const auto half_bad = [](const Vector& x) {
    return x[0] > 0 ? std::numeric_limits<double>::quiet_NaN() : x.squaredNorm();
  };
  const Vector g = estimate_likelihood_gradient(vec({0, 0}), half_bad, 1.0, vec({1, 1}), 64, StreamKey(26));
  EXPECT_TRUE(g.allFinite());
  EXPECT_LT(g[0], 0.0);  // only perturbations with eps_0 <= 0 survive
  const auto all_bad = [](const Vector&) { return std::numeric_limits<double>::infinity(); };
  EXPECT_EQ(estimate_likelihood_gradient(vec({0, 0}), all_bad, 1.0, vec({1, 1}), 8, StreamKey(27)), Vector::Zero(2));
}

TEST(Update, SingleParticleIsPlainGradientStep) {
  RandomStream rng(StreamKey(28));
  for (int t = 0; t < 100; ++t) {
    Vector u(5), g(5);
    for (int d = 0; d < 5; ++d) u[d] = rng.normal(), g[d] = 10 * rng.normal();
    const double eta = rng.uniform();
    const std::vector<Vector> p{u}, gr{g};
    const auto out = svgd_update(p, gr, median_bandwidth(p), eta);
    ASSERT_EQ(out[0], Vector(u + eta * g));
  }
}

TEST(Update, IdenticalParticlesStayIdentical) {
  const std::vector<Vector> p{vec({0.4, 0.1}), vec({0.4, 0.1})};
  const std::vector<Vector> g{Vector::Zero(2), Vector::Zero(2)};
  const auto out = svgd_update(p, g, median_bandwidth(p), 0.5);
  EXPECT_EQ(out[0], out[1]);
  EXPECT_EQ(out[0], p[0]);
}

TEST(Update, RepulsionSeparatesAndIsAntisymmetric) {
  const std::vector<Vector> p{vec({0, 0}), vec({0.1, 0.05})};
  const std::vector<Vector> g{Vector::Zero(2), Vector::Zero(2)};
  const double h = median_bandwidth(p);
  const auto out = svgd_update(p, g, h, 0.3);
  EXPECT_GT((out[0] - out[1]).norm(), (p[0] - p[1]).norm());
  // hand-evaluated: particle 0 moves by eta/2 * (2/h) k (U0 - U1)
  const double k = std::exp(-(p[0] - p[1]).squaredNorm() / h);
  const Vector d0 = 0.3 / 2 * (2 / h) * k * (p[0] - p[1]);
  EXPECT_NEAR((out[0] - p[0] - d0).norm(), 0.0, 1e-15);
  EXPECT_NEAR((out[0] - p[0] + (out[1] - p[1])).norm(), 0.0, 1e-15);
}

SafetyProblem<UnicycleModel, ObstacleField> obstacle_problem(std::size_t workers = 1) {
  SafetyProblem<UnicycleModel, ObstacleField> p{UnicycleModel{}, ObstacleField({{{0.6, 0.0}, 0.2}}, 0.1)};
  p.horizon = 10;
  p.workers = workers;
  return p;
}

SvgdConfig small_config() {
  SvgdConfig cfg;
  cfg.particles = 6;
  cfg.iterations = 3;
  cfg.prior_cov = {1.0, 1.0};
  cfg.perturbation_cov = {0.1, 0.1};
  cfg.perturbations = 8;
  return cfg;
}

TEST(Build, ZeroIterationsReturnsPriorDraws) {
  const auto p = obstacle_problem();
  auto cfg = small_config();
  cfg.iterations = 0;
  cfg.prior_cov = {0.25, 4.0};
  const UnicycleState x0{0, 0, 0, 1};
  const StreamKey key(31);
  const auto r = build_distribution(x0, p, cfg, key);
  ASSERT_EQ(r.mixture.means.size(), 6u);
  std::vector<double> costs;
  for (std::size_t i = 0; i < 6; ++i) {
    RandomStream rng(key.child(stream_tag::kPrior), static_cast<std::uint32_t>(i));
    for (Eigen::Index d = 0; d < 20; ++d) {
      const double sd = d % 2 == 0 ? 0.5 : 2.0;
      ASSERT_EQ(r.mixture.means[i][d], sd * rng.normal());
    }
    costs.push_back(p.raw_cost(x0, r.mixture.means[i]));
  }
  EXPECT_EQ(r.costs, costs);
  EXPECT_EQ(r.mixture.weights, compute_weights(costs, cfg.alpha));
  EXPECT_EQ(r.mixture.variance, tile({0.0625, 1.0}, 10));
}

TEST(Build, DeterministicAndSchedulingIndependent) {
  const UnicycleState x0{0, 0, 0, 1};
  const auto cfg = small_config();
  const auto a = build_distribution(x0, obstacle_problem(1), cfg, StreamKey(32));
  const auto b = build_distribution(x0, obstacle_problem(1), cfg, StreamKey(32));
  const auto c = build_distribution(x0, obstacle_problem(3), cfg, StreamKey(32));
  for (std::size_t i = 0; i < cfg.particles; ++i) {
    EXPECT_EQ(a.mixture.means[i], b.mixture.means[i]);
    EXPECT_EQ(a.mixture.means[i], c.mixture.means[i]);
  }
  EXPECT_EQ(a.mixture.weights, c.mixture.weights);
  EXPECT_EQ(a.best, c.best);
  const auto d = build_distribution(x0, obstacle_problem(1), cfg, StreamKey(33));
  EXPECT_NE(a.mixture.means[0], d.mixture.means[0]);
}

TEST(Build, SweepsLowerTheCostOfASteeredLandscape) {
  // Mean particle cost after SVGD should beat the raw prior on a smooth bowl.
  SyntheticProblem p{[](const Vector& x) { return 10 * (x.array() - 1.0).square().sum(); }, 4, 2};
  SvgdConfig cfg;
  cfg.particles = 8;
  cfg.iterations = 0;
  cfg.alpha = 1.0;
  cfg.step_size = 0.4;  // the self term carries weight 1/m
  cfg.prior_cov = {4.0, 4.0};
  cfg.perturbation_cov = {0.05, 0.05};
  cfg.perturbations = 32;
  const auto before = build_distribution(0, p, cfg, StreamKey(34));
  cfg.iterations = 20;
  const auto after = build_distribution(0, p, cfg, StreamKey(34));
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  EXPECT_LT(mean(after.costs), 0.5 * mean(before.costs));
}

TEST(Mixture, DegenerateCovarianceReturnsProjectedMean) {
  const auto p = obstacle_problem();
  GaussianMixture q{{tile({3.0, 0.2}, 10)}, Vector::Constant(20, 1e-300), {1.0}};
  const auto s = sample_mixture(q, 50, p, UnicycleState{}, StreamKey(35));
  const auto expect = p.admissible(q.means[0], UnicycleState{});
  for (const auto& x : s) EXPECT_EQ(x, expect);
  EXPECT_EQ(expect(0, 0), 1.5);  // omega clamped
}

TEST(Mixture, ZeroWeightNeverSelected) {
  GaussianMixture q{{vec({0}), vec({1})}, vec({1}), {1.0, 0.0}};
  for (auto c : sample_components(q, 100000, StreamKey(36))) ASSERT_EQ(c, 0u);
  GaussianMixture r{{vec({0}), vec({1})}, vec({1}), {0.0, 1.0}};
  for (auto c : sample_components(r, 100000, StreamKey(37))) ASSERT_EQ(c, 1u);
}

TEST(Mixture, FrequenciesMatchWeights) {
  GaussianMixture q{{vec({0}), vec({1}), vec({2}), vec({3})}, vec({1}), {0.5, 0.3, 0.15, 0.05}};
  const std::size_t n = 100000;
  std::vector<double> hits(4, 0.0);
  for (auto c : sample_components(q, n, StreamKey(38))) hits[c] += 1;
  for (std::size_t c = 0; c < 4; ++c) {
    const double w = q.weights[c];
    const double sigma = std::sqrt(n * w * (1 - w));
    EXPECT_LE(std::abs(hits[c] - n * w), 3 * sigma) << c;
  }
}

TEST(Mixture, DrawsArePrefixStable) {
  const auto p = obstacle_problem();
  const auto r = build_distribution(UnicycleState{0, 0, 0, 1}, p, small_config(), StreamKey(39));
  const auto small = sample_mixture(r.mixture, 379, p, UnicycleState{0, 0, 0, 1}, StreamKey(40));
  const auto big = sample_mixture(r.mixture, 757, p, UnicycleState{0, 0, 0, 1}, StreamKey(40));
  for (std::size_t i = 0; i < 379; ++i) ASSERT_EQ(small[i], big[i]);
  const auto comps = sample_components(r.mixture, 379, StreamKey(40));
  EXPECT_EQ(comps.size(), 379u);
}

TEST(Config, Validation) {
  auto cfg = small_config();
  EXPECT_NO_THROW(cfg.validate(2));
  EXPECT_THROW(cfg.validate(3), std::invalid_argument);
  cfg.alpha = 0;
  EXPECT_THROW(cfg.validate(2), std::invalid_argument);
  cfg = small_config();
  cfg.particles = 0;
  EXPECT_THROW(cfg.validate(2), std::invalid_argument);
  cfg = small_config();
  cfg.mixture_cov = {0.1, -1};
  EXPECT_THROW(cfg.validate(2), std::invalid_argument);
}

}  // namespace
