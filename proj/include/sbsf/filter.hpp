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

#include "sbsf/cem.hpp"
#include "sbsf/errors.hpp"
#include "sbsf/parallel.hpp"
#include "sbsf/problem.hpp"
#include "sbsf/rng.hpp"
#include "sbsf/safety.hpp"
#include "sbsf/scenario.hpp"
#include "sbsf/svgd.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sbsf {

// ---------------------------------------------------------------------------
// Terminal-set machinery

// Rewrites `seq` in place so that rolling it out from `start` ends at rest:
// each input is kept unless the speed it leaves could no longer be braked
// away in the remaining steps, in which case it becomes full braking.
// Requires the model's worst-case stopping time to fit in the horizon.
template <StoppableModel Model>
void project_terminal_stop(const Model& model, const typename Model::State& start, ControlSequence& seq) {
  auto x = start;
  const std::size_t horizon = seq.horizon();
  for (std::size_t k = 0; k < horizon; ++k) {
    model.enforce_stop(x, seq.input(k), horizon - k - 1);
    x = model.step(x, seq.input(k));
  }
}

struct TerminalStopProjection {
  template <StoppableModel Model>
  void operator()(const Model& model, const typename Model::State& start, ControlSequence& seq) const {
    project_terminal_stop(model, start, seq);
  }
};

// Braking from top speed must fit in the horizon, otherwise a stopped
// terminal state cannot be guaranteed.
template <StoppableModel Model>
void check_stop_horizon(const Model& model, std::size_t horizon) {
  if (model.max_stop_steps() > horizon) {
    throw ConfigError("horizon", "horizon of " + std::to_string(horizon) + " steps is shorter than the " +
                                     std::to_string(model.max_stop_steps()) + " steps needed to stop from top speed");
  }
}

// Safe control invariant set made of stopped, failure-free states. Holding
// still (the model's invariance input) keeps a stopped state stopped.
template <StoppableModel Model, LevelFunction<typename Model::State> Level>
class StoppedSet {
 public:
  StoppedSet(const Model& model, const Level& level) : model_(&model), level_(&level) {}

  [[nodiscard]] bool contains(const typename Model::State& x) const {
    return model_->is_stopped(x) && (*level_)(x) > 0.0;
  }
  [[nodiscard]] std::vector<double> invariance_input(const typename Model::State& x) const {
    std::vector<double> u(model_->control_dim());
    model_->invariance_input(x, u);
    return u;
  }

 private:
  const Model* model_;
  const Level* level_;
};

template <class Problem>
auto make_stopped_set(const Problem& problem) {
  return StoppedSet<std::decay_t<decltype(problem.model)>, std::decay_t<decltype(problem.level)>>(problem.model,
                                                                                                  problem.level);
}

// Drops the first input and appends the invariance input at `terminal`,
// the rollout end point of `backup`. A terminal outside the invariant set
// means the backup chain is broken.
template <class Invariant, class State>
ControlSequence shift_and_extend(const ControlSequence& backup, const State& terminal, const Invariant& inv) {
  if (!inv.contains(terminal)) {
    throw SafetyChainError("shift_and_extend: backup terminal state is outside the invariant set");
  }
  ControlSequence out(backup.horizon(), backup.dim());
  for (std::size_t k = 1; k < backup.horizon(); ++k) {
    const auto src = backup.input(k);
    std::copy(src.begin(), src.end(), out.input(k - 1).begin());
  }
  const auto tail = inv.invariance_input(terminal);
  std::copy(tail.begin(), tail.end(), out.input(backup.horizon() - 1).begin());
  return out;
}

// ---------------------------------------------------------------------------
// Candidate sources

template <class State>
struct Candidates {
  std::vector<ControlSequence> sequences;
  std::optional<GaussianMixture> distribution;
};

enum class SamplerKind { svgd, cem };

inline const char* to_string(SamplerKind k) { return k == SamplerKind::svgd ? "svgd" : "cem"; }

// Builds the sampling distribution at the predicted state (SVGD mixture or
// CEM Gaussian) and draws N candidates from it.
template <class Problem>
class MixtureSource {
 public:
  using State = typename Problem::State;

  MixtureSource(const Problem& problem, SamplerKind kind, SvgdConfig svgd, CemConfig cem, std::size_t n)
      : problem_(&problem), kind_(kind), svgd_(std::move(svgd)), cem_(std::move(cem)), n_(n) {
    if (n_ < 1) throw std::invalid_argument("mixture source: N must be >= 1");
    if (kind_ == SamplerKind::svgd) {
      svgd_.validate(problem.model.control_dim());
    } else {
      cem_.validate(problem.model.control_dim(), cem_population());
    }
  }

  [[nodiscard]] std::size_t sample_count() const noexcept { return n_; }
  [[nodiscard]] SamplerKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t cem_population() const noexcept { return cem_.population == 0 ? n_ : cem_.population; }

  GaussianMixture build(const State& start, StreamKey key) {
    if (kind_ == SamplerKind::cem) return cem_build(start, *problem_, cem_, cem_population(), key);
    const std::vector<Vector>* init = svgd_.warm_start && warm_.has_value() ? &*warm_ : nullptr;
    auto result = build_distribution(start, *problem_, svgd_, key, init);
    if (svgd_.warm_start) warm_ = shifted(result.mixture.means);
    return std::move(result.mixture);
  }

  Candidates<State> draw(const State& start, StreamKey key) {
    Candidates<State> c;
    c.distribution = build(start, key);
    c.sequences = sample_mixture(*c.distribution, n_, *problem_, start, key.child(stream_tag::kMixtureSample));
    return c;
  }

 private:
  [[nodiscard]] std::vector<Vector> shifted(const std::vector<Vector>& particles) const {
    const auto dim = static_cast<Eigen::Index>(problem_->model.control_dim());
    std::vector<Vector> out;
    out.reserve(particles.size());
    for (const auto& p : particles) {
      Vector s = Vector::Zero(p.size());
      s.head(p.size() - dim) = p.tail(p.size() - dim);
      out.push_back(std::move(s));
    }
    return out;
  }

  const Problem* problem_;
  SamplerKind kind_;
  SvgdConfig svgd_;
  CemConfig cem_;
  std::size_t n_;
  std::optional<std::vector<Vector>> warm_;
};

// Always offers the same candidate list (exhaustive enumeration, replay).
template <class State>
class FixedSource {
 public:
  explicit FixedSource(std::vector<ControlSequence> sequences) : sequences_(std::move(sequences)) {}
  Candidates<State> draw(const State&, StreamKey) { return {sequences_, std::nullopt}; }

 private:
  std::vector<ControlSequence> sequences_;
};

// ---------------------------------------------------------------------------
// Filter

enum class Decision { pass, intervene };

inline const char* to_string(Decision d) { return d == Decision::pass ? "pass" : "intervene"; }

struct FilterState {
  ControlSequence backup;  // stored safe sequence, certified from the current state
  bool backup_valid = false;
  Decision last_decision = Decision::pass;
  std::uint64_t timestep = 0;
};

struct Diagnostics {
  Decision decision = Decision::pass;
  double min_cost = 0.0;
  std::size_t safe_count = 0;
  std::size_t argmin = 0;
  bool nominal_clamped = false;
};

template <class State>
struct StepResult {
  std::vector<double> applied;  // u_safe
  FilterState state;
  Diagnostics diagnostics;
  State predicted;  // f(x_t, u_nom)
  std::optional<GaussianMixture> distribution;
};

// One filtering step. Predicts with the nominal input, scores the sampled
// candidates from the predicted state, and passes the nominal input if the
// best candidate has negative cost (it becomes the new backup). Otherwise
// applies the head of the stored backup and shifts it, after re-checking
// that the backup still certifies safety from x.
template <class Problem, class Source, class Invariant>
StepResult<typename Problem::State> filter_step(const typename Problem::State& x, std::span<const double> u_nom,
                                                const FilterState& fs, Source& source, const Problem& problem,
                                                const Invariant& inv, StreamKey key) {
  using State = typename Problem::State;
  if (!fs.backup_valid) throw PreconditionError("filter_step: no valid backup sequence");
  const auto& model = problem.model;
  if (u_nom.size() != model.control_dim()) throw std::invalid_argument("filter_step: nominal input has wrong size");

  StepResult<State> out;
  std::vector<double> nominal(u_nom.begin(), u_nom.end());
  clamp_to_bounds(model, std::span<double>(nominal));
  out.diagnostics.nominal_clamped = !std::equal(nominal.begin(), nominal.end(), u_nom.begin());
  out.predicted = model.step(x, nominal);

  auto cands = source.draw(out.predicted, key.child(stream_tag::kFilter).child(fs.timestep));
  if (cands.sequences.empty()) throw std::invalid_argument("filter_step: candidate source returned nothing");
  std::vector<double> costs(cands.sequences.size());
  parallel_for(costs.size(), problem.workers,
               [&](std::size_t i) { costs[i] = problem.cost_of(out.predicted, cands.sequences[i]); });

  std::size_t best = 0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (costs[i] < costs[best]) best = i;
    if (costs[i] < 0.0) ++out.diagnostics.safe_count;
  }
  out.diagnostics.argmin = best;
  out.diagnostics.min_cost = costs[best];
  out.distribution = std::move(cands.distribution);

  // In cbf mode a negative cost certifies the successors only; the
  // predicted state itself must be outside the failure set as well.
  const bool pass = costs[best] < 0.0 && problem.level(out.predicted) > 0.0;

  out.state.timestep = fs.timestep + 1;
  out.state.backup_valid = true;
  if (pass) {
    out.applied = std::move(nominal);
    out.state.backup = std::move(cands.sequences[best]);
    out.state.last_decision = Decision::pass;
    out.diagnostics.decision = Decision::pass;
    return out;
  }

  const auto traj = rollout(model, x, fs.backup);
  if (!is_safe(traj, problem.level)) throw SafetyChainError("filter_step: stored backup is no longer safe");
  const auto head = fs.backup.input(0);
  out.applied.assign(head.begin(), head.end());
  out.state.backup = shift_and_extend(fs.backup, traj.states.back(), inv);
  out.state.last_decision = Decision::intervene;
  out.diagnostics.decision = Decision::intervene;
  return out;
}

// Finds the initial backup: first the held-still sequence (projected), then
// up to `max_attempts` batches from the source; the first sequence whose
// rollout is safe and ends in the invariant set wins.
template <class Problem, class Source, class Invariant>
FilterState initialize_backup(const typename Problem::State& x0, Source& source, const Problem& problem,
                              const Invariant& inv, StreamKey key, std::size_t max_attempts) {
  if (!(problem.level(x0) > 0.0)) throw PreconditionError("initialize_backup: start state is in the failure set");
  auto qualifies = [&](const ControlSequence& seq) {
    const auto traj = rollout(problem.model, x0, seq);
    return is_safe(traj, problem.level) && inv.contains(traj.states.back());
  };
  auto accept = [](ControlSequence seq) {
    FilterState fs;
    fs.backup = std::move(seq);
    fs.backup_valid = true;
    return fs;
  };

  {
    ControlSequence hold(problem.horizon, problem.model.control_dim());
    auto x = x0;
    for (std::size_t k = 0; k < problem.horizon; ++k) {
      const auto u = inv.invariance_input(x);
      std::copy(u.begin(), u.end(), hold.input(k).begin());
      x = problem.model.step(x, hold.input(k));
    }
    problem.projection(problem.model, x0, hold);
    if (qualifies(hold)) return accept(std::move(hold));
  }
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    auto cands = source.draw(x0, key.child(stream_tag::kInit).child(attempt));
    for (auto& seq : cands.sequences) {
      if (qualifies(seq)) return accept(std::move(seq));
    }
  }
  throw InitializationError("initialize_backup: no safe sequence ending in the invariant set was found");
}

}  // namespace sbsf
