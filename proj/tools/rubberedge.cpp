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

// rubberedge: model sweeps, simulated experiments, calibration fitting and the
// step-protocol service.

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace rubberedge::cli;

  CLI::App app{"RubberEdge hybrid pointer control toolkit"};
  app.require_subcommand(1);

  ModelOptions model;
  auto* cmd_model = app.add_subcommand("model", "Sweep the clutching and hybrid time models over D");
  cmd_model->add_option("-p,--profile", model.profile, "Device profile (laptop, pda, experiment or from config)")
      ->required();
  cmd_model->add_option("-w,--width", model.width, "Target width W in mm")->check(CLI::PositiveNumber);
  cmd_model->add_option("--from", model.from, "First distance in mm")->check(CLI::PositiveNumber);
  cmd_model->add_option("--to", model.to, "Last distance in mm (default: twice the display diagonal)");
  cmd_model->add_option("--step", model.step, "Distance step in mm")->check(CLI::PositiveNumber);
  cmd_model->add_option("-o,--out", model.out, "CSV output path (default: stdout)");

  SimulateOptions sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Run an experiment manifest with the simulated agent");
  cmd_sim->add_option("-m,--manifest", sim.manifest, "Manifest JSON")->required();
  cmd_sim->add_option("-o,--out", sim.out_dir, "Output directory");
  cmd_sim->add_option("-s,--seed", sim.seed, "Override the manifest seed");
  cmd_sim->add_option("-j,--jobs", sim.jobs, "Worker threads")->check(CLI::PositiveNumber);

  CalibrateOptions cal;
  auto* cmd_cal = app.add_subcommand("calibrate", "Fit the boundary circle and the eight-direction force profile");
  cmd_cal->add_option("--trace", cal.trace, "CSV of traced boundary points x,y in mm")->required();
  cmd_cal->add_option("--pushes", cal.pushes, "CSV of radial pushes angle_deg,x,y")->required();
  cmd_cal->add_option("-o,--out", cal.out, "Calibration JSON output (default: stdout)");

  ServeOptions serve;
  auto* cmd_serve = app.add_subcommand("serve", "Serve the NDJSON step protocol on 127.0.0.1");
  cmd_serve->add_option("--port", serve.port, "TCP port (0 picks a free one)");
  cmd_serve->add_option("--params", serve.params, "Engine parameter JSON");
  cmd_serve->add_option("--port-file", serve.port_file, "Write the bound port here once listening");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*cmd_model) return run_model(model, std::cout, std::cerr);
  if (*cmd_sim) return run_simulate(sim, std::cout, std::cerr);
  if (*cmd_cal) return run_calibrate(cal, std::cout, std::cerr);
  if (*cmd_serve) return run_serve(serve, std::cout, std::cerr);
  return kExitUsage;
}
