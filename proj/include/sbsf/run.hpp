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

#include "sbsf/config.hpp"
#include "sbsf/experiments.hpp"

#include <vector>

namespace sbsf {

// Episode e of a run with seed s uses StreamKey(s).child(e); a random
// crossing case for that episode comes from the kScenario child of it.
inline StreamKey episode_key(std::uint64_t seed, std::size_t episode) { return StreamKey(seed).child(episode); }

inline IntersectionScenario episode_intersection(const RunConfig& cfg, std::size_t episode) {
  if (!cfg.random_vehicles.enabled) return cfg.intersection;
  const auto& rv = cfg.random_vehicles;
  return random_intersection_case(cfg.intersection, rv.count, rv.max_entry, rv.min_headway,
                                  episode_key(cfg.seed, episode).child(stream_tag::kScenario));
}

inline EpisodeLog run_episode(const RunConfig& cfg, std::size_t episode) {
  const auto key = episode_key(cfg.seed, episode);
  switch (cfg.scenario) {
    case ScenarioKind::single_robot:
      return run_single_robot(cfg.robot, cfg.filter, cfg.nominal, key);
    case ScenarioKind::intersection:
      return run_intersection(episode_intersection(cfg, episode), cfg.filter, key);
    case ScenarioKind::sweep:
      break;
  }
  throw std::invalid_argument("run_episode: sweep configurations have no episodes");
}

// Episodes run one after another; each one parallelises its rollouts.
inline std::vector<EpisodeLog> run_episodes(const RunConfig& cfg) {
  std::vector<EpisodeLog> logs;
  logs.reserve(cfg.episodes);
  for (std::size_t e = 0; e < cfg.episodes; ++e) logs.push_back(run_episode(cfg, e));
  return logs;
}

inline SweepResult run_config_sweep(const RunConfig& cfg) {
  if (cfg.scenario != ScenarioKind::sweep) throw std::invalid_argument("run_config_sweep: not a sweep configuration");
  return run_sweep(cfg.robot, cfg.filter, cfg.grid, cfg.rate_trials, StreamKey(cfg.seed));
}

}  // namespace sbsf
