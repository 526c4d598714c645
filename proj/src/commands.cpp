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

#include "commands.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "rubberedge/calibration.hpp"
#include "rubberedge/experiment.hpp"
#include "rubberedge/format.hpp"
#include "rubberedge/io.hpp"
#include "rubberedge/models.hpp"
#include "rubberedge/server.hpp"

namespace rubberedge::cli {
namespace {

using io::json;

// Runs `body`, mapping configuration problems to kExitUsage and anything else
// to kExitFailure.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        numeric = numeric && used == cell.size();
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric && rows.empty() && line_no == 1) continue;  // header
    if (!numeric || row.size() != columns) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) + " numbers");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int run_model(const ModelOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json config = io::default_config();
    const auto profile = io::resolve_profile(opt.profile, &config);
    if (!profile) throw ConfigError("unknown profile '" + opt.profile + "'");
    const models::ModelParams& p = profile->params;
    const models::ScanRange range{opt.from, opt.to, opt.step};
    const auto rows = models::sweep(opt.width, p, range);

    std::ofstream file;
    if (!opt.out.empty()) {
      file.open(opt.out, std::ios::binary);
      if (!file) throw std::runtime_error("cannot write '" + opt.out + "'");
    }
    std::ostream& csv = opt.out.empty() ? out : file;
    json params = io::to_json(p);
    params["profile"] = profile->name;
    params["W_mm"] = opt.width;
    params["scan"] = {{"first_mm", range.first}, {"last_mm", range.last}, {"step_mm", range.step}};
    csv << "# rubberedge model-sweep v1\n# params: " << params.dump() << "\nD,W,technique,T,T1,T2,N,D2\n";
    for (const auto& r : rows) {
      csv << format_number(r.distance) << ',' << format_number(r.width) << ',' << r.technique << ','
          << format_number(r.prediction.total) << ',' << format_number(r.prediction.first) << ','
          << format_number(r.prediction.second) << ',' << r.prediction.clutches << ','
          << format_number(r.prediction.residual) << '\n';
    }

    // The summary goes to stderr when the CSV occupies stdout.
    std::ostream& report = opt.out.empty() ? err : out;
    const auto crossover = models::crossover_distance(opt.width, p, range);
    const auto jump = models::hybrid_discontinuity(opt.width, p);
    report << "profile " << profile->name << ": d=" << format_number(p.operating_range)
           << " mm, CD=" << format_number(p.cd_gain) << ", c=" << format_number(p.utilization)
           << ", W=" << format_number(opt.width) << " mm\n";
    report << "crossover: " << (crossover ? format_number(*crossover) + " mm" : std::string("none in range")) << '\n';
    report << "hybrid branch discontinuity at D=" << format_number(jump.distance)
           << " mm: isotonic " << format_number(jump.isotonic_branch) << " s, elastic limit "
           << format_number(jump.elastic_branch) << " s\n";
    return kExitOk;
  });
}

int run_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json config = io::default_config();
    json doc = io::read_json_file(opt.manifest);
    if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");
    // Config-file engine/agent defaults sit under the manifest's own values.
    for (const char* key : {"engine", "agent"}) {
      if (config.contains(key)) {
        json merged = config.at(key);
        if (doc.contains(key)) merged.merge_patch(doc.at(key));
        doc[key] = merged;
      }
    }
    io::Manifest m = io::manifest_from_json(doc);
    if (opt.seed) m.seed = *opt.seed;
    const auto result = experiment::run(m, opt.jobs);
    experiment::write_outputs(opt.out_dir, m, result);
    out << "wrote " << result.logs.size() << " trials (" << result.timeouts << " timed out) to " << opt.out_dir
        << " with seed " << m.seed << '\n';
    return kExitOk;
  });
}

int run_calibrate(const CalibrateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<Vec2> trace;
    for (const auto& r : read_numeric_csv(opt.trace, 2)) trace.push_back({r[0], r[1]});
    std::vector<RadialPush> pushes;
    for (const auto& r : read_numeric_csv(opt.pushes, 3)) pushes.push_back({r[0], {r[1], r[2]}});
    try {
      const CircleFit fit = fit_boundary(trace);
      const ForceProfile profile = build_force_profile(fit.circle, pushes);
      const std::string doc = io::to_json(profile, fit.rms_residual).dump(2) + "\n";
      if (opt.out.empty()) {
        out << doc;
      } else {
        std::ofstream file(opt.out, std::ios::binary);
        file << doc;
        if (!file) throw std::runtime_error("cannot write '" + opt.out + "'");
        out << "boundary centre (" << format_number(fit.circle.centre.x) << ", " << format_number(fit.circle.centre.y)
            << ") mm, radius " << format_number(fit.circle.radius) << " mm, rms " << format_number(fit.rms_residual)
            << " mm\n";
      }
    } catch (const CalibrationError& e) {
      err << "calibration failed: " << e.what() << '\n';
      return kExitFailure;
    }
    return kExitOk;
  });
}

int run_serve(const ServeOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json config = io::default_config();
    EngineConfig base;
    if (config.contains("engine")) base = io::engine_config_from_json(config.at("engine"), base);
    if (!opt.params.empty()) base = io::engine_config_from_json(io::read_json_file(opt.params), base);

    server::StepServer srv(base, opt.port);
    out << "listening on 127.0.0.1:" << srv.port() << std::endl;
    if (!opt.port_file.empty()) {
      std::ofstream pf(opt.port_file);
      pf << srv.port() << '\n';
    }
    std::signal(SIGPIPE, SIG_IGN);
    srv.run();
    return kExitOk;
  });
}

}  // namespace rubberedge::cli
