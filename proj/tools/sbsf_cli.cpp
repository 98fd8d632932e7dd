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


// sbsf command-line front end.
//
//   sbsf run <config> [--out DIR] [--workers N]
//   sbsf sweep <config> [--out DIR] [--workers N]
//   sbsf sample-size --epsilon E --beta B
//   sbsf validate <config>
//
// Exit codes: 0 ok, 1 safety chain broken or initialisation failed,
// 2 bad configuration or usage, 3 I/O failure.

#include "sbsf/config.hpp"
#include "sbsf/io.hpp"
#include "sbsf/run.hpp"
#include "sbsf/scenario.hpp"

#include <CLI/CLI.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace sbsf;

constexpr int kOk = 0;
constexpr int kSafety = 1;
constexpr int kConfig = 2;
constexpr int kIo = 3;

RunConfig load(const std::string& path, std::size_t workers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str());
  if (workers > 0) cfg.filter.workers = workers;
  return cfg;
}

std::size_t stop_steps(const RunConfig& cfg) {
  if (cfg.scenario == ScenarioKind::intersection) {
    return IntersectionModel(cfg.intersection.vehicles.size(), cfg.intersection.limits).max_stop_steps();
  }
  return UnicycleModel(cfg.robot.limits).max_stop_steps();
}

int cmd_validate(const std::string& path) {
  const auto cfg = load(path, 0);
  const auto& sp = cfg.scenario_params;
  std::printf("config_hash  %s\n", config_hash(cfg).c_str());
  std::printf("scenario     %s\n", to_string(cfg.scenario));
  std::printf("sampler      %s\n", to_string(cfg.filter.kind));
  if (cfg.n_from_epsilon) {
    std::printf("n            %zu  (epsilon %g, beta %g)\n", sp.n, sp.epsilon, sp.beta);
  } else {
    std::printf("n            %zu  (given)\n", sp.n);
  }
  std::printf("epsilon@1e-16 %.6g\n", implied_epsilon(sp.n, 1e-16));
  std::printf("horizon      %zu  (stop from top speed needs %zu)\n", cfg.filter.horizon, stop_steps(cfg));
  if (cfg.scenario == ScenarioKind::sweep) {
    std::printf("grid         %zu x %zu, rate trials %zu\n", cfg.grid.nx(), cfg.grid.ny(), cfg.rate_trials);
  } else {
    std::printf("episodes     %zu\n", cfg.episodes);
  }
  return kOk;
}

int cmd_run(const std::string& path, const std::string& out, std::size_t workers) {
  const auto cfg = load(path, workers);
  if (cfg.scenario == ScenarioKind::sweep) throw ConfigError("scenario", "sweep configurations run with `sbsf sweep`");
  const auto t0 = std::chrono::steady_clock::now();
  const auto logs = run_episodes(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_episodes(logs, cfg, out);
  write_timing(secs, out);

  int rc = kOk;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& log = logs[i];
    std::printf("episode %zu: %s, %zu steps, %zu interventions\n", i, to_string(log.status), log.steps.size(),
                log.interventions);
    if (log.status == EpisodeStatus::init_failed) {
      std::fprintf(stderr, "episode %zu: initialisation failed: %s\n", i, log.message.c_str());
      rc = kSafety;
    } else if (cfg.filter.enabled && log.failure_states > 0) {
      std::fprintf(stderr, "episode %zu: filtered run entered the failure set\n", i);
      rc = kSafety;
    }
  }
  return rc;
}

int cmd_sweep(const std::string& path, const std::string& out, std::size_t workers) {
  const auto cfg = load(path, workers);
  if (cfg.scenario != ScenarioKind::sweep) throw ConfigError("scenario", "expected a sweep configuration");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_config_sweep(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_sweep(r, cfg, out);
  write_timing(secs, out);
  std::printf("feasible cells %zu, intervened %zu, max safe sample rate %.6g\n", r.cells.size(), r.num_intervened,
              r.max_safe_sample_rate);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-based safety filter experiments"};
  app.require_subcommand(1);

  std::string config, out = "out";
  std::size_t workers = 0;
  double epsilon = 0.0, beta = 0.0;

  auto* run = app.add_subcommand("run", "run closed-loop episodes");
  run->add_option("config", config, "JSON configuration")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--workers", workers, "override the worker count");

  auto* sweep = app.add_subcommand("sweep", "intervention sweep over a state grid");
  sweep->add_option("config", config, "JSON configuration")->required();
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--workers", workers, "override the worker count");

  auto* size = app.add_subcommand("sample-size", "samples needed for restrictiveness epsilon at confidence 1-beta");
  size->add_option("--epsilon", epsilon)->required();
  size->add_option("--beta", beta)->required();

  auto* validate = app.add_subcommand("validate", "check a configuration and print derived quantities");
  validate->add_option("config", config, "JSON configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*size) {
      std::printf("%zu\n", required_sample_size(epsilon, beta));
      return kOk;
    }
    if (*validate) return cmd_validate(config);
    if (*run) return cmd_run(config, out, workers);
    if (*sweep) return cmd_sweep(config, out, workers);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const SafetyChainError& e) {
    std::fprintf(stderr, "safety chain broken: %s\n", e.what());
    return kSafety;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  }
  return kOk;
}
