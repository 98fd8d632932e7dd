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

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbsf {

// Identifies the run an output file belongs to.
struct OutputHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scenario;
};

inline OutputHeader make_header(const RunConfig& cfg) { return {config_hash(cfg), cfg.seed, to_string(cfg.scenario)}; }

// 17 significant digits: enough to reload every double bit for bit.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what) {}
};

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(path.parent_path(), "cannot create directory: " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  return out;
}

inline void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError(path, "write failed");
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
  close_checked(out, path);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// strtod rather than stod: subnormals must reload too.
inline double parse_double(const std::string& cell, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) throw IoError(path, "bad number '" + cell + "'");
  return v;
}

}  // namespace detail

// One row per step: t, x_t components, nominal input, applied input,
// intervened flag (0/1), min sampled cost, safe-sample count.
inline void write_episode_csv(const EpisodeLog& log, const OutputHeader& h, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "# config_hash=" << h.config_hash << '\n' << "# seed=" << h.seed << '\n';
  out << "t";
  for (const auto& n : log.state_names) out << ',' << n;
  for (const auto& n : log.control_names) out << ",nom_" << n;
  for (const auto& n : log.control_names) out << ",safe_" << n;
  out << ",intervened,min_cost,safe_count\n";
  for (const auto& r : log.steps) {
    out << r.t;
    for (double v : r.state) out << ',' << format_double(v);
    for (double v : r.u_nom) out << ',' << format_double(v);
    for (double v : r.u_safe) out << ',' << format_double(v);
    out << ',' << (r.decision == Decision::intervene ? 1 : 0) << ',' << format_double(r.min_cost) << ',' << r.safe_count
        << '\n';
  }
  detail::close_checked(out, path);
}

// Reads back what write_episode_csv wrote (steps and column names only).
inline EpisodeLog read_episode_csv(const std::filesystem::path& path, OutputHeader* header = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  EpisodeLog log;
  std::string line;
  std::vector<std::string> cols;
  while (std::getline(in, line)) {
    if (line.rfind("# config_hash=", 0) == 0) {
      if (header) header->config_hash = line.substr(14);
      continue;
    }
    if (line.rfind("# seed=", 0) == 0) {
      if (header) header->seed = std::stoull(line.substr(7));
      continue;
    }
    if (cols.empty()) {
      cols = detail::split(line, ',');
      for (std::size_t i = 1; i < cols.size(); ++i) {
        if (cols[i].rfind("nom_", 0) == 0) {
          log.control_names.push_back(cols[i].substr(4));
        } else if (cols[i].rfind("safe_", 0) != 0 && cols[i] != "intervened" && cols[i] != "min_cost" &&
                   cols[i] != "safe_count") {
          log.state_names.push_back(cols[i]);
        }
      }
      continue;
    }
    const auto cells = detail::split(line, ',');
    const std::size_t ns = log.state_names.size(), nc = log.control_names.size();
    if (cells.size() != 1 + ns + 2 * nc + 3) throw IoError(path, "malformed row: " + line);
    StepRecord r;
    std::size_t i = 0;
    r.t = std::stoull(cells[i++]);
    for (std::size_t k = 0; k < ns; ++k) r.state.push_back(detail::parse_double(cells[i++], path));
    for (std::size_t k = 0; k < nc; ++k) r.u_nom.push_back(detail::parse_double(cells[i++], path));
    for (std::size_t k = 0; k < nc; ++k) r.u_safe.push_back(detail::parse_double(cells[i++], path));
    r.decision = cells[i++] == "1" ? Decision::intervene : Decision::pass;
    r.min_cost = detail::parse_double(cells[i++], path);
    r.safe_count = std::stoull(cells[i++]);
    log.steps.push_back(std::move(r));
  }
  return log;
}

inline nlohmann::json episode_summary(const EpisodeLog& log) {
  nlohmann::json j;
  j["status"] = to_string(log.status);
  j["steps"] = log.steps.size();
  j["interventions"] = log.interventions;
  j["failure_states"] = log.failure_states;
  j["min_level"] = std::isfinite(log.min_level) ? nlohmann::json(log.min_level) : nlohmann::json(nullptr);
  j["final_state"] = log.final_state;
  if (!log.message.empty()) j["message"] = log.message;
  return j;
}

inline nlohmann::json header_json(const OutputHeader& h, const RunConfig& cfg) {
  nlohmann::json j;
  j["config_hash"] = h.config_hash;
  j["seed"] = h.seed;
  j["scenario"] = h.scenario;
  j["sampler"] = to_string(cfg.filter.kind);
  j["n"] = cfg.scenario_params.n;
  if (cfg.n_from_epsilon) {
    j["epsilon"] = cfg.scenario_params.epsilon;
    j["beta"] = cfg.scenario_params.beta;
  }
  j["horizon"] = cfg.filter.horizon;
  j["workers"] = cfg.filter.workers;
  return j;
}

// Episode files plus one summary document for a batch of episodes.
inline void write_episodes(const std::vector<EpisodeLog>& logs, const RunConfig& cfg, const std::filesystem::path& dir) {
  const auto h = make_header(cfg);
  nlohmann::json summary = header_json(h, cfg);
  nlohmann::json eps = nlohmann::json::array();
  std::size_t collisions = 0, goals = 0, init_failed = 0, interventions = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& log = logs[i];
    if (log.status != EpisodeStatus::init_failed) {
      write_episode_csv(log, h, dir / ("episode_" + std::to_string(i) + ".csv"));
    }
    auto e = episode_summary(log);
    e["episode"] = i;
    eps.push_back(std::move(e));
    collisions += log.failure_states > 0;
    goals += log.status == EpisodeStatus::goal_reached;
    init_failed += log.status == EpisodeStatus::init_failed;
    interventions += log.interventions;
  }
  summary["episodes"] = std::move(eps);
  summary["collision_count"] = collisions;
  summary["goal_reached"] = goals;
  summary["init_failed"] = init_failed;
  summary["total_interventions"] = interventions;
  detail::write_json(summary, dir / "summary.json");
}

inline void write_sweep(const SweepResult& r, const RunConfig& cfg, const std::filesystem::path& dir) {
  const auto h = make_header(cfg);
  const auto csv = dir / "sweep.csv";
  auto out = detail::open_for_write(csv);
  out << "# config_hash=" << h.config_hash << '\n' << "# seed=" << h.seed << '\n';
  out << "ix,iy,x,y,intervened,min_cost,safe_samples,rate_safe,rate_trials,rate,rate_lower,rate_upper\n";
  for (const auto& c : r.cells) {
    out << c.ix << ',' << c.iy << ',' << format_double(c.x) << ',' << format_double(c.y) << ',' << (c.intervened ? 1 : 0)
        << ',' << format_double(c.min_cost) << ',' << c.safe_samples << ',' << c.rate.safe << ',' << c.rate.trials << ','
        << format_double(c.rate.rate) << ',' << format_double(c.rate.interval.lower) << ','
        << format_double(c.rate.interval.upper) << '\n';
  }
  detail::close_checked(out, csv);

  nlohmann::json j = header_json(h, cfg);
  j["grid"] = {{"x_min", r.grid.x_min}, {"x_max", r.grid.x_max}, {"y_min", r.grid.y_min}, {"y_max", r.grid.y_max},
               {"step", r.grid.step},   {"v", r.grid.v},         {"theta", r.grid.theta}};
  j["feasible_cells"] = r.cells.size();
  j["rate_trials"] = r.rate_trials;
  j["num_intervened"] = r.num_intervened;
  j["max_safe_sample_rate"] = r.max_safe_sample_rate;
  detail::write_json(j, dir / "summary.json");
}

// Reloads sweep.csv; aggregates are recomputed from the rows.
inline SweepResult read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  SweepResult r;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 12) throw IoError(path, "malformed row: " + line);
    SweepCell c;
    c.ix = std::stoull(f[0]);
    c.iy = std::stoull(f[1]);
    c.x = detail::parse_double(f[2], path);
    c.y = detail::parse_double(f[3], path);
    c.intervened = f[4] == "1";
    c.min_cost = detail::parse_double(f[5], path);
    c.safe_samples = std::stoull(f[6]);
    c.rate.safe = std::stoull(f[7]);
    c.rate.trials = std::stoull(f[8]);
    c.rate.rate = detail::parse_double(f[9], path);
    c.rate.interval = {detail::parse_double(f[10], path), detail::parse_double(f[11], path)};
    r.cells.push_back(c);
  }
  aggregate(r);
  return r;
}

// Wall-clock lives in its own file so the other outputs stay byte-identical.
inline void write_timing(double seconds, const std::filesystem::path& dir) {
  detail::write_json(nlohmann::json{{"wall_clock_seconds", seconds}}, dir / "timing.json");
}

}  // namespace sbsf
