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

// Newline-delimited JSON step protocol.
//
//   -> {"params": {...engine...}, "calibration": {...}, "pointer_start_mm": [x, y]}   (optional, any time)
//   <- {"ok": true, "params": {...resolved engine...}}
//   -> {"t_s": 0.001, "x_mm": 1.5, "y_mm": 0, "contact": true}
//   <- {"dx_mm": 3, "dy_mm": 0, "mode": "isotonic", "penetration_mm": 0, "n_x": null, "n_y": null}
//
// A malformed message gets {"error": "..."} and leaves the session untouched.

#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "rubberedge/hybrid.hpp"
#include "rubberedge/io.hpp"
#include "rubberedge/simkit.hpp"

namespace rubberedge::protocol {

using json = nlohmann::json;

inline json frame_to_json(const ControlFrame& f) {
  return {{"t_s", f.t}, {"x_mm", f.position.x}, {"y_mm", f.position.y}, {"contact", f.contact}};
}

inline ControlFrame frame_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("frame must be a JSON object");
  for (const char* key : {"t_s", "x_mm", "y_mm"}) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ArgumentError(std::string("frame needs numeric '") + key + "'");
  }
  ControlFrame f;
  f.t = j.at("t_s").get<double>();
  f.position = {j.at("x_mm").get<double>(), j.at("y_mm").get<double>()};
  if (j.contains("contact")) {
    if (!j.at("contact").is_boolean()) throw ArgumentError("'contact' must be a boolean");
    f.contact = j.at("contact").get<bool>();
  }
  return f;
}

inline json output_to_json(const StepOutput& o) {
  json j = {{"dx_mm", o.delta.x},
            {"dy_mm", o.delta.y},
            {"mode", simkit::mode_name(o.mode)},
            {"penetration_mm", o.penetration}};
  j["n_x"] = o.exit_point ? json(o.exit_point->x) : json(nullptr);
  j["n_y"] = o.exit_point ? json(o.exit_point->y) : json(nullptr);
  return j;
}

inline json error_reply(const std::string& message) { return {{"error", message}}; }

// One engine per session. Not thread-safe; a connection owns its session.
class StepSession {
 public:
  explicit StepSession(EngineConfig base = {}) : base_(std::move(base)), engine_(base_) {}

  // Handles one message and returns the reply line (without the newline).
  std::string handle_line(const std::string& line) { return handle(line).dump(); }

  json handle(const std::string& line) {
    json msg;
    try {
      msg = json::parse(line);
    } catch (const json::parse_error& e) {
      return error_reply(std::string("malformed JSON: ") + e.what());
    }
    try {
      if (msg.is_object() && (msg.contains("params") || msg.contains("calibration"))) return open(msg);
      return output_to_json(engine_.step(frame_from_json(msg)));
    } catch (const std::exception& e) {
      return error_reply(e.what());
    }
  }

  const Engine& engine() const { return engine_; }

 private:
  json open(const json& msg) {
    EngineConfig cfg = base_;
    if (msg.contains("params") && !msg.at("params").is_null()) cfg = io::engine_config_from_json(msg.at("params"), cfg);
    if (msg.contains("calibration") && !msg.at("calibration").is_null()) {
      cfg.calibration = io::calibration_from_json(msg.at("calibration"));
    }
    Vec2 start;
    io::detail::read_vec(msg, "pointer_start_mm", start);
    engine_ = Engine(cfg, start);
    return {{"ok", true}, {"params", io::to_json(engine_.config())}};
  }

  EngineConfig base_;
  Engine engine_;
};

}  // namespace rubberedge::protocol
