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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace sbsf {

struct SvgdConfig {
  std::size_t particles = 12;
  std::size_t iterations = 5;
  double alpha = 0.1;      // inverse temperature, 1/cost unit
  double step_size = 0.25;
  std::vector<double> prior_cov;         // per input dimension
  std::vector<double> mixture_cov;       // per input dimension; empty means prior_cov / 4
  std::size_t perturbations = 16;        // K rollouts per gradient estimate
  std::vector<double> perturbation_cov;  // per input dimension
  bool warm_start = false;

  [[nodiscard]] std::vector<double> effective_mixture_cov() const {
    if (!mixture_cov.empty()) return mixture_cov;
    std::vector<double> out(prior_cov);
    for (auto& v : out) v *= 0.25;
    return out;
  }

  void validate(std::size_t control_dim) const {
    if (particles < 1) throw std::invalid_argument("svgd: particles must be >= 1");
    if (!(alpha > 0.0) || !(step_size > 0.0)) throw std::invalid_argument("svgd: alpha and step_size must be positive");
    if (perturbations < 2) throw std::invalid_argument("svgd: perturbations must be >= 2");
    auto check = [control_dim](const std::vector<double>& v, const char* what) {
      if (v.size() != control_dim) throw std::invalid_argument(std::string("svgd: ") + what + " has wrong length");
      for (double x : v) {
        if (!(x > 0.0)) throw std::invalid_argument(std::string("svgd: ") + what + " must be positive");
      }
    };
    check(prior_cov, "prior_cov");
    check(perturbation_cov, "perturbation_cov");
    check(effective_mixture_cov(), "mixture_cov");
  }
};

// Weighted mixture of diagonal Gaussians over flattened control sequences.
// All components share one covariance.
struct GaussianMixture {
  std::vector<Vector> means;
  Vector variance;
  std::vector<double> weights;
};

inline constexpr double kBandwidthFloor = 1e-6;

inline double rbf_kernel(const Vector& a, const Vector& b, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rbf_kernel: bandwidth must be positive");
  return std::exp(-(a - b).squaredNorm() / h);
}

// h = med^2 / ln m, med being the median pairwise Euclidean distance.
inline double median_bandwidth(std::span<const Vector> particles) {
  const std::size_t m = particles.size();
  if (m < 2) return kBandwidthFloor;
  std::vector<double> dist;
  dist.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) dist.push_back((particles[i] - particles[j]).norm());
  }
  std::sort(dist.begin(), dist.end());
  const std::size_t n = dist.size();
  const double med = n % 2 == 1 ? dist[n / 2] : 0.5 * (dist[n / 2 - 1] + dist[n / 2]);
  const double h = med * med / std::log(static_cast<double>(m));
  return std::max(h, kBandwidthFloor);
}

// Softmax of -alpha * cost, shifted by the minimum cost.
inline std::vector<double> compute_weights(std::span<const double> costs, double alpha) {
  std::vector<double> w(costs.size());
  if (costs.empty()) return w;
  const double lo = *std::min_element(costs.begin(), costs.end());
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    w[i] = std::exp(-alpha * (costs[i] - lo));
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

// Zeroth-order estimate of grad_U log E_eps[exp(-alpha C(U + eps))] with
// eps ~ N(0, diag(var)): the self-normalised, importance-weighted mean
// perturbation divided by the perturbation variance. Costs are shifted by
// their minimum; non-finite costs get zero weight.
template <class CostFn>
Vector estimate_likelihood_gradient(const Vector& u, CostFn&& cost, double alpha, const Vector& var,
                                    std::size_t perturbations, StreamKey key) {
  const Eigen::Index dim = u.size();
  const Vector sd = var.cwiseSqrt();
  std::vector<Vector> eps(perturbations, Vector(dim));
  std::vector<double> costs(perturbations);
  for (std::size_t k = 0; k < perturbations; ++k) {
    RandomStream rng(key, static_cast<std::uint32_t>(k));
    for (Eigen::Index d = 0; d < dim; ++d) eps[k][d] = sd[d] * rng.normal();
    costs[k] = cost(Vector(u + eps[k]));
  }
  double lo = std::numeric_limits<double>::infinity();
  for (double c : costs) {
    if (std::isfinite(c)) lo = std::min(lo, c);
  }
  Vector acc = Vector::Zero(dim);
  if (!std::isfinite(lo)) return acc;
  double total = 0.0;
  for (std::size_t k = 0; k < perturbations; ++k) {
    if (!std::isfinite(costs[k])) continue;
    const double w = std::exp(-alpha * (costs[k] - lo));
    acc += w * eps[k];
    total += w;
  }
  return acc.cwiseQuotient(var) / total;
}

// Likelihood term (rollout-based estimate) plus the zero-mean Gaussian
// prior term -U / prior_var.
template <class Problem>
Vector grad_log_posterior(const Vector& particle, const typename Problem::State& start, const Problem& problem,
                          const SvgdConfig& cfg, StreamKey key) {
  const Vector var = tile(cfg.perturbation_cov, problem.horizon);
  const Vector prior_var = tile(cfg.prior_cov, problem.horizon);
  auto cost = [&](const Vector& raw) { return problem.raw_cost(start, raw); };
  Vector g = estimate_likelihood_gradient(particle, cost, cfg.alpha, var, cfg.perturbations, key);
  g -= particle.cwiseQuotient(prior_var);
  return g;
}

// One SVGD sweep: U_i += eta/m * sum_j [k(U_j, U_i) g_j + (2/h)(U_i - U_j) k(U_j, U_i)].
inline std::vector<Vector> svgd_update(std::span<const Vector> particles, std::span<const Vector> grads, double h,
                                       double eta) {
  const std::size_t m = particles.size();
  if (grads.size() != m) throw std::invalid_argument("svgd_update: one gradient per particle required");
  std::vector<Vector> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    Vector phi = Vector::Zero(particles[i].size());
    for (std::size_t j = 0; j < m; ++j) {
      const double k = rbf_kernel(particles[j], particles[i], h);
      phi += k * grads[j];
      if (j != i) phi += (2.0 / h) * k * (particles[i] - particles[j]);
    }
    out[i] = particles[i] + eta * (phi / static_cast<double>(m));
  }
  return out;
}

struct SvgdResult {
  GaussianMixture mixture;
  std::vector<double> costs;  // final particle costs
  std::size_t best = 0;       // particle with the lowest final cost
};

// Builds the safety-conditioned sampling mixture from `start`. Particles are
// drawn from the zero-mean prior (or taken from `init`), moved by
// `iterations` SVGD sweeps with a fresh median bandwidth each sweep, then
// weighted by exp(-alpha * cost).
template <class Problem>
SvgdResult build_distribution(const typename Problem::State& start, const Problem& problem, const SvgdConfig& cfg,
                              StreamKey key, const std::vector<Vector>* init = nullptr) {
  const std::size_t m = cfg.particles;
  const Eigen::Index dim = static_cast<Eigen::Index>(problem.flat_dim());
  const Vector prior_sd = tile(cfg.prior_cov, problem.horizon).cwiseSqrt();

  std::vector<Vector> particles(m);
  if (init != nullptr) {
    if (init->size() != m) throw std::invalid_argument("build_distribution: warm start has wrong particle count");
    particles = *init;
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      RandomStream rng(key.child(stream_tag::kPrior), static_cast<std::uint32_t>(i));
      particles[i].resize(dim);
      for (Eigen::Index d = 0; d < dim; ++d) particles[i][d] = prior_sd[d] * rng.normal();
    }
  }

  std::vector<Vector> grads(m);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const StreamKey grad_key = key.child(stream_tag::kGradient).child(it);
    parallel_for(m, problem.workers, [&](std::size_t i) {
      grads[i] = grad_log_posterior(particles[i], start, problem, cfg, grad_key.child(i));
    });
    const double h = median_bandwidth(particles);
    particles = svgd_update(particles, grads, h, cfg.step_size);
  }

  SvgdResult result;
  result.costs.resize(m);
  parallel_for(m, problem.workers, [&](std::size_t i) { result.costs[i] = problem.raw_cost(start, particles[i]); });
  result.best = static_cast<std::size_t>(
      std::distance(result.costs.begin(), std::min_element(result.costs.begin(), result.costs.end())));
  result.mixture.weights = compute_weights(result.costs, cfg.alpha);
  result.mixture.variance = tile(cfg.effective_mixture_cov(), problem.horizon);
  result.mixture.means = std::move(particles);
  return result;
}

namespace detail {

class ComponentPicker {
 public:
  explicit ComponentPicker(const std::vector<double>& weights) : weights_(weights), cumulative_(weights.size()) {
    for (std::size_t c = 0; c < weights.size(); ++c) cumulative_[c] = (total_ += weights[c]);
  }
  [[nodiscard]] std::size_t pick(double uniform) const {
    const double u = uniform * total_;
    auto c = static_cast<std::size_t>(
        std::distance(cumulative_.begin(), std::upper_bound(cumulative_.begin(), cumulative_.end(), u)));
    c = std::min(c, cumulative_.size() - 1);
    while (weights_[c] <= 0.0 && c > 0) --c;
    return c;
  }

 private:
  const std::vector<double>& weights_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

}  // namespace detail

// Draws n sequences: component by weight, Gaussian perturbation, then the
// problem's clamp and projection. Sample i depends only on (key, i), so the
// first n samples of a larger draw are identical.
template <class Problem>
std::vector<ControlSequence> sample_mixture(const GaussianMixture& q, std::size_t n, const Problem& problem,
                                            const typename Problem::State& start, StreamKey key) {
  if (n < 1) throw std::invalid_argument("sample_mixture: n must be >= 1");
  if (q.means.empty() || q.means.size() != q.weights.size()) throw std::invalid_argument("sample_mixture: malformed mixture");
  const detail::ComponentPicker picker(q.weights);
  const Vector sd = q.variance.cwiseSqrt();
  std::vector<ControlSequence> out(n);
  parallel_for(n, problem.workers, [&](std::size_t i) {
    RandomStream rng(key, static_cast<std::uint32_t>(i));
    Vector raw = q.means[picker.pick(rng.uniform())];
    for (Eigen::Index d = 0; d < raw.size(); ++d) raw[d] += sd[d] * rng.normal();
    out[i] = problem.admissible(std::move(raw), start);
  });
  return out;
}

// Component chosen by each of the first n draws of sample_mixture with the same key.
inline std::vector<std::size_t> sample_components(const GaussianMixture& q, std::size_t n, StreamKey key) {
  const detail::ComponentPicker picker(q.weights);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(key, static_cast<std::uint32_t>(i));
    out[i] = picker.pick(rng.uniform());
  }
  return out;
}

}  // namespace sbsf
