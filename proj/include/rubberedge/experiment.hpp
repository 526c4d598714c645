/*
 * Copyright 2026 The RubberEdge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Runs an experiment manifest: every technique x transfer x D x W condition,
// `repetitions` reciprocal trials each, with per-condition seeds derived from
// the manifest seed so the worker count never changes the output.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "rubberedge/io.hpp"
#include "rubberedge/simkit.hpp"

namespace rubberedge::experiment {

struct PlannedTrial {
  std::size_t ordinal = 0;
  Technique technique = Technique::RubberEdge;
  std::size_t transfer = 0;
  simkit::Trial trial;
  int index = 0;
  std::uint64_t seed = 0;
};

struct RunResult {
  std::vector<simkit::TrialLog> logs;
  std::size_t timeouts = 0;
};

// Targets depend on (D, W) only, so techniques and transfers see the same
// sequence.
inline std::vector<PlannedTrial> plan(const io::Manifest& m) {
  const auto profile = models::find_profile(m.profile);
  if (!profile) throw ConfigError("unknown profile '" + m.profile + "'");
  const simkit::Display display{profile->display_width, profile->display_height};

  std::vector<PlannedTrial> out;
  for (std::size_t di = 0; di < m.distances.size(); ++di) {
    for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
      const std::uint64_t seed = simkit::derive_seed(m.seed, di, wi);
      const auto trials = simkit::generate_reciprocal_task(m.distances[di], m.widths[wi], m.repetitions, seed, display);
      for (Technique tech : m.techniques) {
        for (std::size_t ti = 0; ti < m.transfers.size(); ++ti) {
          for (int r = 0; r < m.repetitions; ++r) {
            out.push_back({0, tech, ti, trials[static_cast<std::size_t>(r)], r, seed});
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].ordinal = i;
  return out;
}

inline simkit::TrialLog run_planned(const io::Manifest& m, const PlannedTrial& p) {
  EngineConfig cfg = m.engine;
  cfg.technique = p.technique;
  cfg.transfer = m.transfers[p.transfer].curve;
  simkit::TrialLog log;
  try {
    const simkit::Script script = simkit::synthesize_movement(p.trial, m.agent, cfg);
    log = simkit::run_trial(script, cfg, p.trial, m.agent.timeout);
  } catch (simkit::TrialTimeout& e) {
    log = std::move(e.log);
  } catch (const simkit::UnreachableTarget&) {
    log = {};
    log.timed_out = true;
    log.distance = p.trial.distance;
    log.width = p.trial.width;
  }
  log.technique = simkit::technique_name(p.technique);
  log.transfer = m.transfers[p.transfer].name;
  log.index = p.index;
  log.seed = p.seed;
  return log;
}

inline RunResult run(const io::Manifest& m, unsigned jobs = 1) {
  const auto planned = plan(m);
  RunResult result;
  result.logs.resize(planned.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < planned.size();) result.logs[i] = run_planned(m, planned[i]);
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(planned.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& log : result.logs) result.timeouts += log.timed_out ? 1 : 0;
  return result;
}

inline std::string trial_stem(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%04zu", ordinal);
  return buf;
}

// Writes trials/trial_NNNN.{csv,json}, summary.csv and run.json under `dir`.
inline void write_outputs(const std::filesystem::path& dir, const io::Manifest& m, const RunResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "trials");
  const io::json params = io::to_json(m);
  const std::string params_line = params.dump();

  for (std::size_t i = 0; i < r.logs.size(); ++i) {
    const auto& log = r.logs[i];
    const std::string stem = trial_stem(i);
    std::ofstream csv(dir / "trials" / (stem + ".csv"), std::ios::binary);
    simkit::write_trial_csv(csv, log, params_line);
    io::json sidecar = io::metrics_to_json(log);
    sidecar["params"] = params;
    std::ofstream js(dir / "trials" / (stem + ".json"), std::ios::binary);
    js << sidecar.dump(2) << '\n';
    if (!csv || !js) throw std::runtime_error("failed writing " + stem);
  }

  std::ofstream summary(dir / "summary.csv", std::ios::binary);
  simkit::write_summary_csv(summary, simkit::summarize(r.logs), params_line);

  io::json run = {{"manifest", params},
                  {"seed", m.seed},
                  {"trials", r.logs.size()},
                  {"timeouts", r.timeouts},
                  {"trial_csv_schema", simkit::kTrialCsvHeader},
                  {"summary_csv_schema", simkit::kSummaryCsvHeader}};
  std::ofstream rj(dir / "run.json", std::ios::binary);
  rj << run.dump(2) << '\n';
  if (!summary || !rj) throw std::runtime_error("failed writing run outputs to " + dir.string());
}

}  // namespace rubberedge::experiment
