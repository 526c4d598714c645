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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace rubberedge::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct ModelOptions {
  std::string profile;
  double width = 4.0;
  double from = 1.0;
  double to = 0.0;  // <= 0: twice the display diagonal
  double step = 1.0;
  std::string out;  // empty: CSV to stdout
};

struct SimulateOptions {
  std::string manifest;
  std::string out_dir = "run";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

struct CalibrateOptions {
  std::string trace;   // CSV x,y
  std::string pushes;  // CSV angle_deg,x,y
  std::string out;     // empty: stdout
};

struct ServeOptions {
  std::uint16_t port = 7878;
  std::string params;     // engine JSON
  std::string port_file;  // written once listening
};

int run_model(const ModelOptions& opt, std::ostream& out, std::ostream& err);
int run_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int run_calibrate(const CalibrateOptions& opt, std::ostream& out, std::ostream& err);
int run_serve(const ServeOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace rubberedge::cli
