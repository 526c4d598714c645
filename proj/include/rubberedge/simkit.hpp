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

// Simulation kit: reciprocal pointing tasks, an idealised minimum-jerk agent
// that drives the engine, trial replay, and per-trial / per-condition metrics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rubberedge/errors.hpp"
#include "rubberedge/format.hpp"
#include "rubberedge/geometry.hpp"
#include "rubberedge/hybrid.hpp"
#include "rubberedge/models.hpp"

namespace rubberedge::simkit {

inline std::string technique_name(Technique t) {
  switch (t) {
    case Technique::Position:
      return "position";
    case Technique::Baseline:
      return "baseline";
    case Technique::RubberEdge:
      return "rubberedge";
  }
  return "unknown";
}

inline Technique parse_technique(const std::string& name) {
  if (name == "position") return Technique::Position;
  if (name == "baseline") return Technique::Baseline;
  if (name == "rubberedge" || name == "hybrid") return Technique::RubberEdge;
  throw ConfigError("unknown technique '" + name + "'");
}

inline std::string mode_name(Mode m) { return m == Mode::Elastic ? "elastic" : "isotonic"; }

inline Mode parse_mode(const std::string& name) {
  if (name == "isotonic") return Mode::Isotonic;
  if (name == "elastic") return Mode::Elastic;
  throw ConfigError("unknown mode '" + name + "'");
}

// Seeded generator with a platform-independent uniform mapping.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Mixes a base seed with indices into an independent stream seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Display {
  double width = 765.0;   // mm
  double height = 306.0;  // mm
  double diagonal() const { return std::hypot(width, height); }
};

struct Trial {
  double distance = 0.0;  // mm
  double width = 0.0;     // mm
  Vec2 start;             // display mm
  Vec2 target;            // display mm
  double index_of_difficulty = 0.0;
};

// Reciprocal targets: each target is exactly D from the previous one, in a
// random direction that keeps it on the display (inset by W/2).
inline std::vector<Trial> generate_reciprocal_task(double distance, double width, int count, std::uint64_t seed,
                                                   Display display = {}) {
  if (count < 1) throw ArgumentError("generate_reciprocal_task: count must be >= 1");
  if (!(distance > 0.0) || !(width > 0.0)) throw ArgumentError("generate_reciprocal_task: D and W must be > 0");
  const double x0 = width / 2.0;
  const double y0 = width / 2.0;
  const double x1 = display.width - width / 2.0;
  const double y1 = display.height - width / 2.0;
  if (!(x1 > x0) || !(y1 > y0)) throw ConfigError("display too small for the target width");
  if (distance > std::hypot(x1 - x0, y1 - y0)) {
    throw ConfigError("target distance exceeds the display diagonal");
  }

  const auto inside = [&](Vec2 p) { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; };
  const auto farthest_corner = [&](Vec2 p) {
    const Vec2 corners[] = {{x0, y0}, {x1, y0}, {x0, y1}, {x1, y1}};
    Vec2 best = corners[0];
    for (Vec2 c : corners) {
      if (distance_sq(p, c) > distance_sq(p, best)) best = c;
    }
    return best;
  };

  Rng rng(seed);
  Vec2 current;
  for (int attempt = 0;; ++attempt) {
    current = {rng.uniform(x0, x1), rng.uniform(y0, y1)};
    if (norm(farthest_corner(current) - current) >= distance) break;
    if (attempt > 1000) {
      current = {x0, y0};
      break;
    }
  }

  std::vector<Trial> trials;
  trials.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::optional<Vec2> next;
    for (int attempt = 0; attempt < 256 && !next; ++attempt) {
      const Vec2 candidate = current + from_polar(distance, rng.uniform(0.0, 2.0 * std::numbers::pi));
      if (inside(candidate)) next = candidate;
    }
    if (!next) {
      // Every point of the rectangle is within reach of its farthest corner.
      next = current + normalized(farthest_corner(current) - current) * distance;
    }
    trials.push_back({distance, width, current, *next, models::index_of_difficulty(distance, width)});
    current = *next;
  }
  return trials;
}

struct AgentProfile {
  double peak_speed = 150.0;       // device mm/s reached mid-stroke
  double min_stroke_time = 0.08;   // s
  double utilization = 0.75;       // fraction of the zone used per engagement
  double clutch_time = 0.2;        // s per lift
  double rate_speed = 225.0;       // display mm/s aimed for in the elastic band
  double timeout = 30.0;           // s
  double frame_period = 1e-3;      // s

  void validate() const {
    if (!(peak_speed > 0.0)) throw ConfigError("agent peak speed must be > 0");
    if (!(min_stroke_time > 0.0)) throw ConfigError("agent min stroke time must be > 0");
    if (!(utilization > 0.0 && utilization <= 1.0)) throw ConfigError("agent utilization must be in (0, 1]");
    if (!(clutch_time >= 0.0)) throw ConfigError("agent clutch time must be >= 0");
    if (!(rate_speed > 0.0)) throw ConfigError("agent rate speed must be > 0");
    if (!(timeout > 0.0)) throw ConfigError("agent timeout must be > 0");
    if (!(frame_period > 0.0)) throw ConfigError("agent frame period must be > 0");
  }
};

struct Script {
  std::vector<ControlFrame> frames;
};

class UnreachableTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Minimum-jerk position profile on [0, 1].
inline double min_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

namespace detail {

// Distance along unit direction u from p until leaving the circle (centre, r).
inline double ray_to_circle(Vec2 p, Vec2 u, Vec2 centre, double r) {
  const Vec2 f = p - centre;
  const double b = dot(f, u);
  const double c = dot(f, f) - r * r;
  const double disc = b * b - c;
  if (disc <= 0.0) return 0.0;
  return std::max(0.0, -b + std::sqrt(disc));
}

class Agent {
 public:
  Agent(const Trial& trial, const AgentProfile& profile, const EngineConfig& cfg)
      : trial_(trial), profile_(profile), cfg_(cfg), engine_(cfg, trial.start) {}

  Script run() {
    const Vec2 origin = engine_.config().zone.centre;
    const double radius = engine_.config().zone.radius;
    const Vec2 u = direction_to_target();
    const double back = profile_.utilization * radius;
    if (emit(origin - u * back, true)) return std::move(script_);

    if (cfg_.technique == Technique::Position) {
      position_control(origin, back);
    } else {
      hybrid_control(origin, radius);
    }
    return std::move(script_);
  }

 private:
  bool selected() const { return distance(engine_.state().pointer, trial_.target) <= trial_.width / 2.0; }

  Vec2 direction_to_target() const {
    const Vec2 d = normalized(trial_.target - engine_.state().pointer);
    return norm(d) > 0.0 ? d : Vec2{1.0, 0.0};
  }

  double remaining() const { return distance(trial_.target, engine_.state().pointer); }

  bool emit(Vec2 pos, bool contact) {
    const double t = static_cast<double>(script_.frames.size()) * profile_.frame_period;
    if (t > profile_.timeout) {
      throw UnreachableTarget("agent could not reach the target within " + format_number(profile_.timeout) + " s");
    }
    const ControlFrame frame{t, pos, contact};
    script_.frames.push_back(frame);
    engine_.step(frame);
    finger_ = pos;
    return selected();
  }

  int stroke_steps(double length) const {
    const double duration = std::max(profile_.min_stroke_time, 1.875 * length / profile_.peak_speed);
    return std::max(1, static_cast<int>(std::ceil(duration / profile_.frame_period - 1e-9)));
  }

  bool stroke(Vec2 to) {
    const Vec2 from = finger_;
    const int steps = stroke_steps(distance(from, to));
    for (int i = 1; i <= steps; ++i) {
      if (emit(from + (to - from) * min_jerk(static_cast<double>(i) / steps), true)) return true;
    }
    return false;
  }

  bool clutch(Vec2 new_position) {
    const int steps = std::max(1, static_cast<int>(std::lround(profile_.clutch_time / profile_.frame_period)));
    for (int i = 0; i < steps; ++i) {
      if (emit(new_position, false)) return true;
    }
    return emit(new_position, true);
  }

  // Display distance covered by a straight minimum-jerk stroke of `length`.
  double predicted_display(double length) const {
    const int steps = stroke_steps(length);
    double total = 0.0;
    double prev = 0.0;
    for (int i = 1; i <= steps; ++i) {
      const double s = length * min_jerk(static_cast<double>(i) / steps);
      const double ds = s - prev;
      total += ds * cfg_.transfer(ds / profile_.frame_period);
      prev = s;
    }
    return total;
  }

  // Device stroke length that covers `display` mm, capped at `max_length`.
  double device_length_for(double display, double max_length) const {
    if (predicted_display(max_length) <= display) return max_length;
    double lo = 0.0;
    double hi = max_length;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (predicted_display(mid) < display ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  void position_control(Vec2 origin, double back) {
    while (true) {
      const Vec2 u = direction_to_target();
      const double room = ray_to_circle(finger_, u, origin, back);
      const double needed = device_length_for(remaining(), room);
      if (needed < room || predicted_display(room) >= remaining()) {
        if (needed > 1e-9 && stroke(finger_ + u * needed)) return;
        if (needed <= 1e-9 || room - needed < 1e-6) {
          if (clutch(origin - direction_to_target() * back)) return;
        }
        continue;
      }
      if (stroke(finger_ + u * room)) return;
      if (clutch(origin - direction_to_target() * back)) return;
    }
  }

  double push_depth(Vec2 u) const {
    const ElasticParams& e = cfg_.elastic;
    if (cfg_.technique == Technique::Baseline) {
      if (!(e.cubic_gain > 0.0)) throw UnreachableTarget("baseline rate gain is zero");
      const double force = std::cbrt(profile_.rate_speed * 1e-3 / e.cubic_gain);
      return force / e.spring_k * 1e3;
    }
    if (!(e.rate_gain > 0.0)) throw UnreachableTarget("rate gain is zero");
    const double wanted = std::min(profile_.rate_speed / e.rate_gain, e.max_penetration);
    if (cfg_.calibration) {
      return wanted / e.max_penetration * cfg_.calibration->max_penetration(heading_deg(u));
    }
    return wanted;
  }

  void hybrid_control(Vec2 origin, double radius) {
    const double back = profile_.utilization * radius;
    bool pushed = false;
    while (true) {
      const Vec2 u = direction_to_target();
      const double room = ray_to_circle(finger_, u, origin, radius) * (1.0 - 1e-9);
      if (predicted_display(room) >= remaining()) {
        const double needed = device_length_for(remaining(), room);
        if (needed > 1e-9 && stroke(finger_ + u * needed)) return;
        if (needed <= 1e-9 || room - needed < 1e-6) {
          if (clutch(origin - direction_to_target() * back)) return;
        }
        continue;
      }
      if (pushed) {
        // Already used the elastic band once; recentre with a clutch.
        if (clutch(origin - u * back)) return;
        pushed = false;
        continue;
      }
      pushed = true;
      const Vec2 through = finger_ + u * room;
      const Vec2 radial = normalized(through - origin);
      if (stroke(origin + radial * (radius + push_depth(radial)))) return;
      while (!emit(finger_, true)) {
      }
      return;
    }
  }

  Trial trial_;
  AgentProfile profile_;
  EngineConfig cfg_;
  Engine engine_;
  Script script_;
  Vec2 finger_;
};

}  // namespace detail

// Scripts an idealised user for one trial at the agent's frame rate. The agent
// closes the loop on the engine's pointer, so the returned frames replay to
// the same trajectory.
inline Script synthesize_movement(const Trial& trial, const AgentProfile& agent, const EngineConfig& cfg) {
  agent.validate();
  cfg.validate();
  return detail::Agent(trial, agent, cfg).run();
}

struct LoggedFrame {
  ControlFrame input;
  Vec2 pointer;  // display mm after the frame
  Vec2 delta;    // display mm
  Mode mode = Mode::Isotonic;
};

// Continuity at one isotonic -> elastic transition.
struct Transition {
  std::size_t frame = 0;         // index of the first elastic frame
  double isotonic_speed = 0.0;   // display mm/s of the last isotonic frame
  double elastic_speed = 0.0;    // display mm/s of the first elastic frame
  double entry_direction_change = 0.0;  // degrees, last isotonic -> first elastic
  double max_direction_change = 0.0;    // degrees, over the whole excursion
};

struct TrialLog {
  std::string technique;
  std::string transfer;
  double distance = 0.0;
  double width = 0.0;
  int index = 0;
  std::uint64_t seed = 0;

  std::vector<LoggedFrame> frames;
  bool timed_out = false;
  double selection_time = 0.0;  // s
  long clutch_invocations = 0;  // contact engagements
  long elastic_invocations = 0;
  double clutch_time = 0.0;     // s with contact off
  double elastic_time = 0.0;    // s in elastic mode
  double max_speed_jump = 0.0;      // display mm/s
  double max_direction_jump = 0.0;  // degrees
  std::vector<Transition> transitions;
};

class TrialTimeout : public std::runtime_error {
 public:
  TrialTimeout(const std::string& what, TrialLog partial) : std::runtime_error(what), log(std::move(partial)) {}
  TrialLog log;
};

namespace detail {
inline constexpr double kNegligibleDelta = 1e-12;  // mm
}

// Recomputes every metric from the raw frames. Frame k's interval is
// t_k - t_{k-1} and is attributed to frame k's contact state and mode.
inline void compute_metrics(TrialLog& log) {
  log.clutch_invocations = 0;
  log.elastic_invocations = 0;
  log.clutch_time = 0.0;
  log.elastic_time = 0.0;
  log.max_speed_jump = 0.0;
  log.max_direction_jump = 0.0;
  log.transitions.clear();

  const auto& f = log.frames;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const bool contact = f[k].input.contact;
    if (contact && (k == 0 || !f[k - 1].input.contact)) ++log.clutch_invocations;
    if (f[k].mode == Mode::Elastic && (k == 0 || f[k - 1].mode != Mode::Elastic)) ++log.elastic_invocations;
    if (k == 0) continue;
    const double dt = f[k].input.t - f[k - 1].input.t;
    if (!contact) log.clutch_time += dt;
    if (f[k].mode == Mode::Elastic) log.elastic_time += dt;
  }

  for (std::size_t k = 2; k < f.size(); ++k) {
    if (f[k].mode != Mode::Elastic || f[k - 1].mode != Mode::Isotonic) continue;
    if (!f[k].input.contact || !f[k - 1].input.contact) continue;
    Transition tr;
    tr.frame = k;
    tr.isotonic_speed = norm(f[k - 1].delta) / (f[k - 1].input.t - f[k - 2].input.t);
    tr.elastic_speed = norm(f[k].delta) / (f[k].input.t - f[k - 1].input.t);

    std::optional<Vec2> prev;
    bool first = true;
    for (std::size_t j = k - 1; j < f.size() && (j == k - 1 || f[j].mode == Mode::Elastic); ++j) {
      if (norm(f[j].delta) <= detail::kNegligibleDelta) continue;
      if (prev) {
        const double change = rad_to_deg(angle_between(*prev, f[j].delta));
        if (first && j == k) tr.entry_direction_change = change;
        tr.max_direction_change = std::max(tr.max_direction_change, change);
        first = false;
      }
      prev = f[j].delta;
    }
    log.max_speed_jump = std::max(log.max_speed_jump, std::abs(tr.elastic_speed - tr.isotonic_speed));
    log.max_direction_jump = std::max(log.max_direction_jump, tr.max_direction_change);
    log.transitions.push_back(tr);
  }
}

// Replays frames through a fresh engine; no selection logic.
inline std::vector<LoggedFrame> replay(std::span<const ControlFrame> frames, const EngineConfig& cfg,
                                       Vec2 pointer_start = {}) {
  Engine engine(cfg, pointer_start);
  std::vector<LoggedFrame> out;
  out.reserve(frames.size());
  for (const auto& frame : frames) {
    const StepOutput o = engine.step(frame);
    out.push_back({frame, engine.state().pointer, o.delta, o.mode});
  }
  return out;
}

// Metrics over a bare frame replay (crossing scripts and other target-free runs).
inline TrialLog analyse(std::span<const ControlFrame> frames, const EngineConfig& cfg, Vec2 pointer_start = {}) {
  TrialLog log;
  log.technique = technique_name(cfg.technique);
  log.frames = replay(frames, cfg, pointer_start);
  if (!log.frames.empty()) log.selection_time = log.frames.back().input.t - log.frames.front().input.t;
  compute_metrics(log);
  return log;
}

// Replays a script against a trial. Selection happens on the first frame whose
// pointer lies inside the target disc.
inline TrialLog run_trial(const Script& script, const EngineConfig& cfg, const Trial& trial, double timeout = 30.0) {
  if (script.frames.empty()) throw ArgumentError("run_trial: empty script");
  Engine engine(cfg, trial.start);
  TrialLog log;
  log.technique = technique_name(cfg.technique);
  log.distance = trial.distance;
  log.width = trial.width;
  const double t0 = script.frames.front().t;
  bool selected = false;
  for (const auto& frame : script.frames) {
    if (frame.t - t0 > timeout) break;
    const StepOutput o = engine.step(frame);
    log.frames.push_back({frame, engine.state().pointer, o.delta, o.mode});
    if (distance(engine.state().pointer, trial.target) <= trial.width / 2.0) {
      selected = true;
      log.selection_time = frame.t - t0;
      break;
    }
  }
  compute_metrics(log);
  if (!selected) {
    log.timed_out = true;
    log.selection_time = log.frames.back().input.t - t0;
    throw TrialTimeout("trial never reached the target", std::move(log));
  }
  return log;
}

// One straight-line crossing of the zone boundary: the device approaches the
// exit point at constant speed and `off_radial_deg` to the radius, then eases
// to a stop a little beyond the boundary.
struct CrossingSpec {
  double boundary_angle = 0.0;   // rad, heading of the exit point from O
  double off_radial_deg = 0.0;   // approach angle relative to the outward radius
  double speed = 80.0;           // device mm/s at the crossing
  double side = 1.0;             // +1 / -1: which way the approach is tilted
  double final_penetration = 1.5;  // mm, radial depth the easing aims for
};

inline std::vector<ControlFrame> crossing_script(const ZonePose& zone, const CrossingSpec& spec, double dt = 1e-3,
                                                 double tail_time = 0.3) {
  if (!(spec.speed > 0.0) || !(dt > 0.0)) throw ArgumentError("crossing_script: speed and dt must be > 0");
  if (!(spec.off_radial_deg >= 0.0 && spec.off_radial_deg < 90.0)) {
    throw ArgumentError("crossing_script: off-radial angle must be in [0, 90)");
  }
  const double alpha = deg_to_rad(spec.off_radial_deg);
  const Vec2 radial = from_polar(1.0, spec.boundary_angle);
  const Vec2 exit = zone.centre + radial * zone.radius;
  const Vec2 u = rotated(radial, spec.side >= 0.0 ? alpha : -alpha);

  // Lead-in stays inside the circle: chord behind the exit point is 2 R cos(alpha).
  const double chord = 2.0 * zone.radius * std::cos(alpha);
  const double lead_time = std::min(0.05, 0.8 * chord / spec.speed);
  const double crossing_time = lead_time + 0.37 * dt;  // between frames
  const double stop = spec.final_penetration / std::max(std::cos(alpha), 0.25);
  const double tau = stop / spec.speed;

  std::vector<ControlFrame> frames;
  const int count = static_cast<int>(std::ceil((crossing_time + tail_time) / dt));
  for (int k = 0; k <= count; ++k) {
    const double t = k * dt;
    const double rel = t - crossing_time;
    const double s = rel <= 0.0 ? spec.speed * rel : spec.speed * tau * (1.0 - std::exp(-rel / tau));
    frames.push_back({t, exit + u * s, true});
  }
  return frames;
}

// Seeded family of oblique crossings: uniform exit heading, off-radial angle
// in [min_deg, max_deg], speed in [min_speed, max_speed].
inline std::vector<CrossingSpec> crossing_suite(int count, std::uint64_t seed, double min_deg = 0.0,
                                                double max_deg = 75.0, double min_speed = 40.0,
                                                double max_speed = 100.0) {
  Rng rng(seed);
  std::vector<CrossingSpec> specs;
  for (int i = 0; i < count; ++i) {
    CrossingSpec s;
    s.boundary_angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    s.off_radial_deg = rng.uniform(min_deg, max_deg);
    s.speed = rng.uniform(min_speed, max_speed);
    s.side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    specs.push_back(s);
  }
  return specs;
}

struct Stat {
  double mean = 0.0;
  double ci95 = 0.0;  // half width, normal approximation
};

inline Stat describe(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return {std::nan(""), std::nan("")};
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
  return s;
}

struct ConditionSummary {
  std::string technique;
  std::string transfer;
  double distance = 0.0;
  double width = 0.0;
  long trials = 0;
  long timeouts = 0;
  Stat selection_time;
  Stat clutch_time;
  Stat clutch_invocations;
  Stat elastic_invocations;
  Stat elastic_time;
};

// Per (technique, transfer, D, W) aggregates. Timed-out trials are counted
// but excluded from the means.
inline std::vector<ConditionSummary> summarize(const std::vector<TrialLog>& logs) {
  using Key = std::tuple<std::string, std::string, double, double>;
  std::map<Key, std::vector<const TrialLog*>> groups;
  for (const auto& log : logs) groups[{log.technique, log.transfer, log.distance, log.width}].push_back(&log);

  std::vector<ConditionSummary> out;
  for (const auto& [key, members] : groups) {
    ConditionSummary s;
    std::tie(s.technique, s.transfer, s.distance, s.width) = key;
    std::vector<double> sel, ct, ci, ei, et;
    for (const TrialLog* log : members) {
      ++s.trials;
      if (log->timed_out) {
        ++s.timeouts;
        continue;
      }
      sel.push_back(log->selection_time);
      ct.push_back(log->clutch_time);
      ci.push_back(static_cast<double>(log->clutch_invocations));
      ei.push_back(static_cast<double>(log->elastic_invocations));
      et.push_back(log->elastic_time);
    }
    s.selection_time = describe(sel);
    s.clutch_time = describe(ct);
    s.clutch_invocations = describe(ci);
    s.elastic_invocations = describe(ei);
    s.elastic_time = describe(et);
    out.push_back(std::move(s));
  }
  return out;
}

inline constexpr const char* kTrialCsvVersion = "# rubberedge trial-log v1";
inline constexpr const char* kTrialCsvHeader = "t,x_in,y_in,contact,x_ptr,y_ptr,mode";
inline constexpr const char* kSummaryCsvVersion = "# rubberedge summary v1";
inline constexpr const char* kSummaryCsvHeader =
    "technique,transfer,D,W,n,timeouts,selection_time_mean,selection_time_ci95,clutch_time_mean,clutch_time_ci95,"
    "clutch_invocations_mean,clutch_invocations_ci95,elastic_invocations_mean,elastic_invocations_ci95,"
    "elastic_time_mean,elastic_time_ci95";

// `params_line` is embedded verbatim as a "# params: ..." comment.
inline void write_trial_csv(std::ostream& os, const TrialLog& log, const std::string& params_line = {}) {
  os << kTrialCsvVersion << '\n';
  if (!params_line.empty()) os << "# params: " << params_line << '\n';
  os << kTrialCsvHeader << '\n';
  for (const auto& f : log.frames) {
    os << format_number(f.input.t) << ',' << format_number(f.input.position.x) << ','
       << format_number(f.input.position.y) << ',' << (f.input.contact ? 1 : 0) << ',' << format_number(f.pointer.x)
       << ',' << format_number(f.pointer.y) << ',' << mode_name(f.mode) << '\n';
  }
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw ConfigError("trial csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}
}  // namespace detail

// Parses and validates a trial-log CSV. Pointer deltas are rebuilt from
// consecutive pointer positions. Comment lines may appear before the header.
inline std::vector<LoggedFrame> read_trial_csv(std::istream& is, Vec2 pointer_start = {}) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<LoggedFrame> frames;
  Vec2 prev_pointer = pointer_start;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line.front() == '#') continue;
      if (line != kTrialCsvHeader) throw ConfigError("trial csv: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    const auto cells = detail::split_csv(line);
    if (cells.size() != 7) throw ConfigError("trial csv line " + std::to_string(line_no) + ": expected 7 fields");
    LoggedFrame f;
    f.input.t = detail::parse_double(cells[0], line_no);
    f.input.position = {detail::parse_double(cells[1], line_no), detail::parse_double(cells[2], line_no)};
    if (cells[3] != "0" && cells[3] != "1") {
      throw ConfigError("trial csv line " + std::to_string(line_no) + ": contact must be 0 or 1");
    }
    f.input.contact = cells[3] == "1";
    f.pointer = {detail::parse_double(cells[4], line_no), detail::parse_double(cells[5], line_no)};
    f.mode = parse_mode(cells[6]);
    if (!frames.empty() && !(f.input.t > frames.back().input.t)) {
      throw ConfigError("trial csv line " + std::to_string(line_no) + ": timestamps must increase");
    }
    f.delta = frames.empty() ? Vec2{} : f.pointer - prev_pointer;
    prev_pointer = f.pointer;
    frames.push_back(f);
  }
  if (!header) throw ConfigError("trial csv: missing header");
  return frames;
}

inline void write_summary_csv(std::ostream& os, const std::vector<ConditionSummary>& rows,
                              const std::string& params_line = {}) {
  os << kSummaryCsvVersion << '\n';
  if (!params_line.empty()) os << "# params: " << params_line << '\n';
  os << kSummaryCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.technique << ',' << r.transfer << ',' << format_number(r.distance) << ',' << format_number(r.width) << ','
       << r.trials << ',' << r.timeouts;
    for (const Stat* s : {&r.selection_time, &r.clutch_time, &r.clutch_invocations, &r.elastic_invocations,
                          &r.elastic_time}) {
      os << ',' << format_number(s->mean) << ',' << format_number(s->ci95);
    }
    os << '\n';
  }
}

}  // namespace rubberedge::simkit
