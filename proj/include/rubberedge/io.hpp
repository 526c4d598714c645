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

// JSON forms of the configuration types, calibration documents, experiment
// manifests and per-trial metric sidecars. Every field is optional on input
// and falls back to the in-code default.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rubberedge/calibration.hpp"
#include "rubberedge/errors.hpp"
#include "rubberedge/hybrid.hpp"
#include "rubberedge/models.hpp"
#include "rubberedge/simkit.hpp"
#include "rubberedge/transfer.hpp"

namespace rubberedge::io {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

namespace detail {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

inline void read_vec(const json& j, const char* key, Vec2& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(std::string("field '") + key + "' must be [x, y]");
  }
  out = {v[0].get<double>(), v[1].get<double>()};
}

inline json vec(Vec2 v) { return json::array({v.x, v.y}); }

inline void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

}  // namespace detail

// {"kind":"constant","gain":2} or {"kind":"table","knots":[[0,1.6],...]}.
// The strings "cg" and "pa" name the two standard curves.
inline GainCurve gain_curve_from_json(const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "cg" || name == "constant") return GainCurve::constant(2.0);
    if (name == "pa" || name == "acceleration") return GainCurve::pointer_acceleration();
    throw ConfigError("unknown transfer function '" + name + "'");
  }
  detail::require_object(j, "transfer");
  std::string kind;
  detail::read(j, "kind", kind);
  if (kind == "constant") {
    double gain = 0.0;
    detail::read(j, "gain", gain);
    return GainCurve::constant(gain);
  }
  if (kind == "table") {
    if (!j.contains("knots") || !j.at("knots").is_array()) throw ConfigError("table transfer needs 'knots'");
    std::vector<GainCurve::Knot> knots;
    for (const auto& k : j.at("knots")) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
        throw ConfigError("each knot must be [speed_mm_s, gain]");
      }
      knots.push_back({k[0].get<double>(), k[1].get<double>()});
    }
    return GainCurve::table(std::move(knots));
  }
  throw ConfigError("transfer 'kind' must be 'constant' or 'table'");
}

inline json to_json(const GainCurve& c) {
  if (c.kind() == GainCurve::Kind::Constant) return {{"kind", "constant"}, {"gain", c.constant_gain()}};
  json knots = json::array();
  for (const auto& k : c.knots()) knots.push_back({k.speed, k.gain});
  return {{"kind", "table"}, {"knots", knots}};
}

inline GainCurve load_gain_curve(const std::string& path) { return gain_curve_from_json(read_json_file(path)); }

inline ForceProfile calibration_from_json(const json& j) {
  detail::require_object(j, "calibration");
  Circle boundary;
  detail::read_vec(j, "centre_mm", boundary.centre);
  detail::read(j, "radius_mm", boundary.radius);
  if (!j.contains("samples") || !j.at("samples").is_array() || j.at("samples").size() != 8) {
    throw CalibrationError("calibration needs exactly 8 samples");
  }
  std::array<PenetrationSample, 8> samples{};
  for (std::size_t i = 0; i < 8; ++i) {
    const json& s = j.at("samples")[i];
    detail::require_object(s, "calibration sample");
    detail::read(s, "angle_deg", samples[i].angle_deg);
    detail::read(s, "max_penetration_mm", samples[i].max_penetration);
  }
  return ForceProfile(boundary, samples);
}

inline json to_json(const ForceProfile& p, std::optional<double> rms = std::nullopt) {
  json samples = json::array();
  for (const auto& s : p.samples()) samples.push_back({{"angle_deg", s.angle_deg}, {"max_penetration_mm", s.max_penetration}});
  json j = {{"centre_mm", detail::vec(p.boundary().centre)}, {"radius_mm", p.boundary().radius}, {"samples", samples}};
  if (rms) j["rms_mm"] = *rms;
  return j;
}

inline ElasticParams elastic_from_json(const json& j, ElasticParams e = {}) {
  detail::require_object(j, "elastic");
  detail::read(j, "spring_k", e.spring_k);
  detail::read(j, "cubic_gain", e.cubic_gain);
  detail::read(j, "rate_gain", e.rate_gain);
  detail::read(j, "mixing_constant", e.mixing_constant);
  detail::read(j, "max_penetration_mm", e.max_penetration);
  if (j.contains("mixing_reading")) {
    const auto r = j.at("mixing_reading").get<std::string>();
    if (r == "time_constant") e.mixing_reading = MixingReading::TimeConstant;
    else if (r == "rate") e.mixing_reading = MixingReading::Rate;
    else throw ConfigError("mixing_reading must be 'time_constant' or 'rate'");
  }
  if (j.contains("mixing")) {
    const auto m = j.at("mixing").get<std::string>();
    if (m == "magnitude") e.mixing = VelocityMixing::Magnitude;
    else if (m == "vector") e.mixing = VelocityMixing::Vector;
    else throw ConfigError("mixing must be 'magnitude' or 'vector'");
  }
  return e;
}

inline json to_json(const ElasticParams& e) {
  return {{"spring_k", e.spring_k},
          {"cubic_gain", e.cubic_gain},
          {"rate_gain", e.rate_gain},
          {"mixing_constant", e.mixing_constant},
          {"mixing_reading", e.mixing_reading == MixingReading::TimeConstant ? "time_constant" : "rate"},
          {"mixing", e.mixing == VelocityMixing::Magnitude ? "magnitude" : "vector"},
          {"max_penetration_mm", e.max_penetration}};
}

inline ZonePose zone_from_json(const json& j, const ZonePose& base = ZonePose::disc({}, 20.0)) {
  detail::require_object(j, "zone");
  Vec2 centre = base.centre;
  double radius = base.radius;
  double mass = base.mass;
  double friction = base.friction;
  double translation = base.translation_gain;
  detail::read_vec(j, "centre_mm", centre);
  detail::read(j, "radius_mm", radius);
  detail::read(j, "mass_kg", mass);
  detail::read(j, "friction", friction);
  detail::read(j, "translation_gain", translation);
  ZonePose z = ZonePose::disc(centre, radius, mass, friction, translation);
  detail::read(j, "moment_of_inertia", z.moment_of_inertia);
  z.validate();
  return z;
}

inline json to_json(const ZonePose& z) {
  return {{"centre_mm", detail::vec(z.centre)}, {"radius_mm", z.radius},           {"mass_kg", z.mass},
          {"friction", z.friction},             {"translation_gain", z.translation_gain},
          {"moment_of_inertia", z.moment_of_inertia}};
}

inline EngineConfig engine_config_from_json(const json& j, EngineConfig cfg = {}) {
  detail::require_object(j, "engine");
  if (j.contains("technique")) cfg.technique = simkit::parse_technique(j.at("technique").get<std::string>());
  if (j.contains("transfer")) cfg.transfer = gain_curve_from_json(j.at("transfer"));
  if (j.contains("zone")) cfg.zone = zone_from_json(j.at("zone"), cfg.zone);
  if (j.contains("elastic")) cfg.elastic = elastic_from_json(j.at("elastic"), cfg.elastic);
  detail::read(j, "speed_smoothing_s", cfg.speed_smoothing);
  detail::read(j, "max_step_s", cfg.max_step);
  if (j.contains("calibration") && !j.at("calibration").is_null()) {
    cfg.calibration = calibration_from_json(j.at("calibration"));
  }
  cfg.validate();
  return cfg;
}

inline json to_json(const EngineConfig& cfg) {
  json j = {{"technique", simkit::technique_name(cfg.technique)},
            {"transfer", to_json(cfg.transfer)},
            {"zone", to_json(cfg.zone)},
            {"elastic", to_json(cfg.elastic)},
            {"speed_smoothing_s", cfg.speed_smoothing},
            {"max_step_s", cfg.max_step}};
  j["calibration"] = cfg.calibration ? to_json(*cfg.calibration) : json(nullptr);
  return j;
}

inline models::ModelParams model_params_from_json(const json& j, models::ModelParams p = {}) {
  detail::require_object(j, "model parameters");
  detail::read(j, "d_mm", p.operating_range);
  detail::read(j, "cd_gain", p.cd_gain);
  detail::read(j, "c", p.utilization);
  detail::read(j, "clutch_time_s", p.clutch_time);
  detail::read(j, "display_diagonal_mm", p.display_diagonal);
  if (j.contains("fitts_isotonic")) {
    detail::read(j.at("fitts_isotonic"), "a", p.isotonic.a);
    detail::read(j.at("fitts_isotonic"), "b", p.isotonic.b);
  }
  if (j.contains("fitts_elastic")) {
    detail::read(j.at("fitts_elastic"), "a", p.elastic.a);
    detail::read(j.at("fitts_elastic"), "b", p.elastic.b);
  }
  if (j.contains("reading")) {
    const auto r = j.at("reading").get<std::string>();
    if (r == "throughput") p.reading = models::CoefficientReading::ThroughputBitsPerSecond;
    else if (r == "slope") p.reading = models::CoefficientReading::SlopeSecondsPerBit;
    else throw ConfigError("reading must be 'throughput' or 'slope'");
  }
  if (j.contains("clutch_rule")) {
    const auto r = j.at("clutch_rule").get<std::string>();
    if (r == "ceil") p.clutch_rule = models::ClutchCountRule::CeilEngagements;
    else if (r == "floor") p.clutch_rule = models::ClutchCountRule::FloorRatio;
    else throw ConfigError("clutch_rule must be 'ceil' or 'floor'");
  }
  p.validate();
  return p;
}

inline json to_json(const models::ModelParams& p) {
  return {{"d_mm", p.operating_range},
          {"cd_gain", p.cd_gain},
          {"c", p.utilization},
          {"clutch_time_s", p.clutch_time},
          {"fitts_isotonic", {{"a", p.isotonic.a}, {"b", p.isotonic.b}}},
          {"fitts_elastic", {{"a", p.elastic.a}, {"b", p.elastic.b}}},
          {"reading", p.reading == models::CoefficientReading::ThroughputBitsPerSecond ? "throughput" : "slope"},
          {"clutch_rule", p.clutch_rule == models::ClutchCountRule::CeilEngagements ? "ceil" : "floor"},
          {"display_diagonal_mm", p.display_diagonal}};
}

inline simkit::AgentProfile agent_from_json(const json& j, simkit::AgentProfile a = {}) {
  detail::require_object(j, "agent");
  detail::read(j, "peak_speed_mm_s", a.peak_speed);
  detail::read(j, "min_stroke_time_s", a.min_stroke_time);
  detail::read(j, "utilization", a.utilization);
  detail::read(j, "clutch_time_s", a.clutch_time);
  detail::read(j, "rate_speed_mm_s", a.rate_speed);
  detail::read(j, "timeout_s", a.timeout);
  detail::read(j, "frame_period_s", a.frame_period);
  a.validate();
  return a;
}

inline json to_json(const simkit::AgentProfile& a) {
  return {{"peak_speed_mm_s", a.peak_speed}, {"min_stroke_time_s", a.min_stroke_time},
          {"utilization", a.utilization},    {"clutch_time_s", a.clutch_time},
          {"rate_speed_mm_s", a.rate_speed}, {"timeout_s", a.timeout},
          {"frame_period_s", a.frame_period}};
}

// Named device profiles: built-in presets, optionally extended or overridden by
// the "profiles" object of a config document.
inline std::optional<models::DeviceProfile> resolve_profile(const std::string& name, const json* config = nullptr) {
  std::optional<models::DeviceProfile> base = models::find_profile(name);
  if (config && config->contains("profiles") && config->at("profiles").contains(name)) {
    const json& pj = config->at("profiles").at(name);
    models::DeviceProfile p = base.value_or(models::DeviceProfile{name, {}, 0.0, 0.0});
    p.params = model_params_from_json(pj, p.params);
    if (pj.contains("display_mm")) {
      Vec2 size;
      detail::read_vec(pj, "display_mm", size);
      p.display_width = size.x;
      p.display_height = size.y;
      if (!pj.contains("display_diagonal_mm")) p.params.display_diagonal = std::hypot(size.x, size.y);
    }
    return p;
  }
  return base;
}

// Config document named by RUBBEREDGE_CONFIG, or an empty object.
inline json default_config() {
  if (const char* path = std::getenv("RUBBEREDGE_CONFIG"); path && *path) return read_json_file(path);
  return json::object();
}

inline json metrics_to_json(const simkit::TrialLog& log) {
  json transitions = json::array();
  for (const auto& t : log.transitions) {
    transitions.push_back({{"frame", t.frame},
                           {"isotonic_speed_mm_s", t.isotonic_speed},
                           {"elastic_speed_mm_s", t.elastic_speed},
                           {"entry_direction_change_deg", t.entry_direction_change},
                           {"max_direction_change_deg", t.max_direction_change}});
  }
  return {{"technique", log.technique},
          {"transfer", log.transfer},
          {"D_mm", log.distance},
          {"W_mm", log.width},
          {"index", log.index},
          {"seed", log.seed},
          {"timed_out", log.timed_out},
          {"selection_time_s", log.selection_time},
          {"clutch_invocations", log.clutch_invocations},
          {"elastic_invocations", log.elastic_invocations},
          {"clutch_time_s", log.clutch_time},
          {"elastic_time_s", log.elastic_time},
          {"max_speed_jump_mm_s", log.max_speed_jump},
          {"max_direction_jump_deg", log.max_direction_jump},
          {"transitions", transitions}};
}

// Rebuilds a trial log from its CSV and metrics sidecar. Frame-derived metrics
// are recomputed from the CSV; labels and selection time come from the sidecar.
inline simkit::TrialLog load_trial(std::istream& csv, const json& sidecar) {
  simkit::TrialLog log;
  log.frames = simkit::read_trial_csv(csv);
  detail::read(sidecar, "technique", log.technique);
  detail::read(sidecar, "transfer", log.transfer);
  detail::read(sidecar, "D_mm", log.distance);
  detail::read(sidecar, "W_mm", log.width);
  detail::read(sidecar, "index", log.index);
  detail::read(sidecar, "seed", log.seed);
  detail::read(sidecar, "timed_out", log.timed_out);
  simkit::compute_metrics(log);
  if (sidecar.contains("selection_time_s")) {
    detail::read(sidecar, "selection_time_s", log.selection_time);
  } else if (!log.frames.empty()) {
    log.selection_time = log.frames.back().input.t - log.frames.front().input.t;
  }
  return log;
}

struct TransferSpec {
  std::string name;
  GainCurve curve;
};

struct Manifest {
  std::uint64_t seed = 1;
  std::string profile = "experiment";
  std::vector<Technique> techniques{Technique::Position, Technique::RubberEdge};
  std::vector<TransferSpec> transfers;
  std::vector<double> distances{172.0, 344.0, 688.0};
  std::vector<double> widths{2.0, 4.0, 8.0};
  int repetitions = 9;
  EngineConfig engine;
  simkit::AgentProfile agent;
};

inline Manifest manifest_from_json(const json& j) {
  detail::require_object(j, "manifest");
  Manifest m;
  detail::read(j, "seed", m.seed);
  detail::read(j, "profile", m.profile);
  if (j.contains("engine")) m.engine = engine_config_from_json(j.at("engine"));
  if (j.contains("agent")) m.agent = agent_from_json(j.at("agent"));
  if (j.contains("techniques")) {
    m.techniques.clear();
    for (const auto& t : j.at("techniques")) m.techniques.push_back(simkit::parse_technique(t.get<std::string>()));
  }
  if (j.contains("transfers")) {
    for (const auto& t : j.at("transfers")) {
      if (t.is_string()) {
        m.transfers.push_back({t.get<std::string>(), gain_curve_from_json(t)});
      } else {
        detail::require_object(t, "transfer entry");
        std::string name = "custom";
        detail::read(t, "name", name);
        if (!t.contains("curve")) throw ConfigError("transfer entry needs a 'curve'");
        m.transfers.push_back({name, gain_curve_from_json(t.at("curve"))});
      }
    }
  }
  if (m.transfers.empty()) m.transfers.push_back({"cg", GainCurve::constant(2.0)});
  detail::read(j, "distances_mm", m.distances);
  detail::read(j, "widths_mm", m.widths);
  detail::read(j, "repetitions", m.repetitions);
  if (m.techniques.empty() || m.distances.empty() || m.widths.empty()) {
    throw ConfigError("manifest needs at least one technique, distance and width");
  }
  if (m.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  return m;
}

inline json to_json(const Manifest& m) {
  json techniques = json::array();
  for (auto t : m.techniques) techniques.push_back(simkit::technique_name(t));
  json transfers = json::array();
  for (const auto& t : m.transfers) transfers.push_back({{"name", t.name}, {"curve", to_json(t.curve)}});
  return {{"seed", m.seed},           {"profile", m.profile},     {"techniques", techniques},
          {"transfers", transfers},   {"distances_mm", m.distances}, {"widths_mm", m.widths},
          {"repetitions", m.repetitions}, {"engine", to_json(m.engine)}, {"agent", to_json(m.agent)}};
}

}  // namespace rubberedge::io
