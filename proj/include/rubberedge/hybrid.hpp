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

// Hybrid position/rate control.
//
// Inside a circular isotonic zone the device drives the pointer by position
// control through a transfer function. Beyond the circle the pointer moves by
// rate control, using one of two mappings:
//
//   Baseline    V = K_cubic * (k * penetration)^3 along the radius O->P.
//               Speed drops to zero and direction snaps to radial at the
//               transition.
//
//   RubberEdge  V = (|V0| e^{-t/A} + K_rate |NP| (1 - e^{-t/A})) * NP/|NP|
//               where N is the exit point, carried around the circle by a
//               damped rotation driven by the torque ON x k*NP. Speed and
//               direction are continuous at the transition.
//
// All lengths are millimetres and times seconds; SI conversion happens only
// inside the force/torque terms.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "rubberedge/calibration.hpp"
#include "rubberedge/errors.hpp"
#include "rubberedge/geometry.hpp"
#include "rubberedge/transfer.hpp"

namespace rubberedge {

enum class Technique { Position, Baseline, RubberEdge };
enum class Mode { Isotonic, Elastic };

// How the mixing constant A enters the exponent.
enum class MixingReading {
  TimeConstant,  // e^{-t/A}, A in seconds
  Rate,          // e^{-A t}, A in 1/s
};

// Whether the pre-transition velocity is mixed by magnitude along NP or as a
// full vector.
enum class VelocityMixing { Magnitude, Vector };

struct ElasticParams {
  double spring_k = 200.0;        // N/m
  double cubic_gain = 0.03;       // (m/s)/N^3
  double rate_gain = 150.0;       // 1/s; 2 mm of penetration -> 300 mm/s
  double mixing_constant = 0.3;
  MixingReading mixing_reading = MixingReading::TimeConstant;
  VelocityMixing mixing = VelocityMixing::Magnitude;
  double max_penetration = 2.0;   // mm

  // Weight of the pre-transition velocity t seconds after the exit.
  double pre_transition_weight(double t) const {
    return mixing_reading == MixingReading::TimeConstant ? std::exp(-t / mixing_constant)
                                                          : std::exp(-mixing_constant * t);
  }

  void validate() const {
    if (!(spring_k > 0.0)) throw ConfigError("spring_k must be > 0");
    if (!(cubic_gain >= 0.0)) throw ConfigError("cubic_gain must be >= 0");
    if (!(rate_gain >= 0.0)) throw ConfigError("rate_gain must be >= 0");
    if (!(mixing_constant > 0.0)) throw ConfigError("mixing_constant must be > 0");
    if (!(max_penetration > 0.0)) throw ConfigError("max_penetration must be > 0");
  }
};

// Pose and dynamics of the isotonic zone. The physical boundary (centre,
// radius) is fixed in device space; the exit point N rides on it.
struct ZonePose {
  Vec2 centre;                      // O, device mm
  double radius = 20.0;             // R, mm
  Vec2 exit_point;                  // N, meaningful in elastic mode only
  double angular_velocity = 0.0;    // rad/s
  double moment_of_inertia = 2e-4;  // kg m^2
  double friction = 3e-3;           // N m s/rad
  double mass = 1.0;                // kg
  double translation_gain = 150.0;  // 1/s
  Vec2 display_anchor;              // zone centre as seen on the display, mm

  // Uniform disc of the zone's own radius: J = m R^2 / 2.
  static ZonePose disc(Vec2 centre, double radius_mm, double mass_kg = 1.0, double friction = 3e-3,
                       double translation_gain = 150.0) {
    ZonePose z;
    z.centre = centre;
    z.radius = radius_mm;
    z.mass = mass_kg;
    z.friction = friction;
    z.translation_gain = translation_gain;
    const double r_m = radius_mm * 1e-3;
    z.moment_of_inertia = 0.5 * mass_kg * r_m * r_m;
    z.exit_point = centre + Vec2{radius_mm, 0.0};
    z.validate();
    return z;
  }

  void validate() const {
    if (!(radius > 0.0)) throw ConfigError("zone radius must be > 0");
    if (!(moment_of_inertia > 0.0)) throw ConfigError("moment of inertia must be > 0");
    if (!(friction >= 0.0)) throw ConfigError("friction must be >= 0");
    if (!(translation_gain >= 0.0)) throw ConfigError("translation gain must be >= 0");
  }
};

struct EngineConfig {
  Technique technique = Technique::RubberEdge;
  GainCurve transfer = GainCurve::constant(2.0);
  ElasticParams elastic;
  ZonePose zone = ZonePose::disc({}, 20.0);
  std::optional<ForceProfile> calibration;
  double speed_smoothing = 0.0;  // s; 0 = raw per-frame speed
  double max_step = 1e-3;        // s, internal integration step

  void validate() const {
    elastic.validate();
    zone.validate();
    if (!(max_step > 0.0)) throw ConfigError("max_step must be > 0");
    if (!(speed_smoothing >= 0.0)) throw ConfigError("speed_smoothing must be >= 0");
  }
};

struct EngineState {
  Mode mode = Mode::Isotonic;
  ZonePose zone;
  Vec2 pre_transition_velocity;  // V0, display mm/s
  double time_since_exit = 0.0;  // s
  Vec2 pointer;                  // display mm
  Vec2 last_device;              // device mm
  Vec2 last_display_velocity;    // display mm/s of the previous frame
  SpeedSmoother smoother;
  bool contact = false;
  bool primed = false;
  double last_time = 0.0;
};

struct StepResult {
  Vec2 display_delta;
  EngineState state;
};

enum class Region { Inside, Outside };

struct Classification {
  Region region = Region::Inside;
  std::optional<Vec2> crossing;
};

// Zone membership of P (the boundary belongs to the isotonic zone). When a
// previous position is given and the segment previous->P meets the circle,
// `crossing` holds the relevant intersection: the exit point when previous is
// inside, otherwise the first intersection along the segment.
inline Classification classify(Vec2 p, const ZonePose& zone, std::optional<Vec2> previous = std::nullopt) {
  Classification out;
  out.region = norm(p - zone.centre) <= zone.radius ? Region::Inside : Region::Outside;
  if (!previous) return out;

  const Vec2 d = p - *previous;
  const Vec2 f = *previous - zone.centre;
  const double a = dot(d, d);
  if (a == 0.0) return out;
  const double b = 2.0 * dot(f, d);
  const double c = dot(f, f) - zone.radius * zone.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return out;

  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double s1 = q / a;
  double s2 = q != 0.0 ? c / q : s1;
  if (s1 > s2) std::swap(s1, s2);

  const bool prev_inside = norm(f) <= zone.radius;
  std::optional<double> s;
  if (prev_inside) {
    if (out.region == Region::Outside) s = std::clamp(s2, 0.0, 1.0);
  } else if (s1 >= 0.0 && s1 <= 1.0) {
    s = s1;
  } else if (out.region == Region::Inside) {
    s = std::clamp(s1, 0.0, 1.0);
  }
  if (s) {
    const Vec2 hit = *previous + d * *s;
    out.crossing = zone.centre + normalized(hit - zone.centre) * zone.radius;
  }
  return out;
}

// Advances the zone rotation one step: J dw/dt = tau - mu w with
// tau = ON x (k NP). Angular velocity uses the exact solution for constant
// torque over the step; N is then rotated by the new w and pinned to the circle.
// The display anchor translates by lambda * NP * dt.
inline ZonePose integrate_boundary(const ZonePose& zone, Vec2 p, double dt, double spring_k = 200.0) {
  if (!(dt > 0.0)) throw ArgumentError("integrate_boundary: dt must be > 0");
  ZonePose z = zone;
  const Vec2 on = z.exit_point - z.centre;
  const Vec2 np = p - z.exit_point;
  const double torque = cross(on * 1e-3, np * (1e-3 * spring_k));  // N m

  if (z.friction > 0.0) {
    const double decay = std::exp(-z.friction * dt / z.moment_of_inertia);
    z.angular_velocity = z.angular_velocity * decay + (torque / z.friction) * (1.0 - decay);
  } else {
    z.angular_velocity += torque / z.moment_of_inertia * dt;
  }

  Vec2 rel = rotated(on, z.angular_velocity * dt);
  if (norm(rel) == 0.0) rel = {z.radius, 0.0};
  z.exit_point = z.centre + normalized(rel) * z.radius;
  z.display_anchor += np * (z.translation_gain * dt);
  return z;
}

// Baseline rate law, display mm/s: radial, cubic in the spring force.
inline Vec2 baseline_velocity(const ElasticParams& elastic, const ZonePose& zone, Vec2 p) {
  const Vec2 radial = p - zone.centre;
  const double penetration = norm(radial) - zone.radius;
  if (!(penetration > 0.0)) return {};
  const double force = elastic.spring_k * penetration * 1e-3;               // N
  const double speed = elastic.cubic_gain * force * force * force * 1e3;    // mm/s
  return normalized(radial) * speed;
}

// Rate input for the RubberEdge law, mm. Uses |NP| clamped to the maximum
// penetration, or the calibrated normalised penetration when available.
inline double rubberedge_rate_input(const EngineConfig& cfg, const EngineState& s, Vec2 p) {
  if (cfg.calibration) {
    return normalized_penetration(p, *cfg.calibration) * cfg.elastic.max_penetration;
  }
  return std::min(norm(p - s.zone.exit_point), cfg.elastic.max_penetration);
}

// Mixed RubberEdge velocity at the state's time since exit, display mm/s.
inline Vec2 rubberedge_velocity(const EngineConfig& cfg, const EngineState& s, Vec2 p) {
  const Vec2 np = p - s.zone.exit_point;
  const double len = norm(np);
  if (len == 0.0) return {};
  const Vec2 dir = np / len;
  const double w = cfg.elastic.pre_transition_weight(s.time_since_exit);
  const double rate = cfg.elastic.rate_gain * rubberedge_rate_input(cfg, s, p) * (1.0 - w);
  if (cfg.elastic.mixing == VelocityMixing::Vector) {
    return s.pre_transition_velocity * w + dir * rate;
  }
  return dir * (norm(s.pre_transition_velocity) * w + rate);
}

namespace detail {

inline void require_dt(double dt) {
  if (!(dt > 0.0)) throw ArgumentError("step: dt must be > 0");
}

inline Vec2 isotonic_delta(const EngineConfig& cfg, EngineState& s, Vec2 device_delta, double dt) {
  double speed = norm(device_delta) / dt;
  if (cfg.speed_smoothing > 0.0) speed = s.smoother.update(speed, dt);
  return device_delta * cfg.transfer(speed);
}

inline StepResult finish(EngineState s, Vec2 p, Vec2 delta, double dt) {
  s.pointer += delta;
  s.last_device = p;
  s.last_display_velocity = delta / dt;
  return {delta, s};
}

inline StepResult isotonic_step(const EngineConfig& cfg, EngineState s, Vec2 p, Vec2 from, double dt) {
  const Vec2 delta = isotonic_delta(cfg, s, p - from, dt);
  return finish(std::move(s), p, delta, dt);
}

inline void enter_elastic(EngineState& s, Vec2 exit_point, Vec2 v0) {
  s.mode = Mode::Elastic;
  s.zone.exit_point = exit_point;
  s.zone.angular_velocity = 0.0;
  s.zone.display_anchor = s.pointer;
  s.time_since_exit = 0.0;
  s.pre_transition_velocity = v0;
}

inline void leave_elastic(EngineState& s) {
  s.mode = Mode::Isotonic;
  s.zone.angular_velocity = 0.0;
  s.time_since_exit = 0.0;
  s.pre_transition_velocity = {};
  s.smoother.reset();
}

inline Vec2 radial_projection(const ZonePose& zone, Vec2 p) {
  Vec2 dir = normalized(p - zone.centre);
  if (norm(dir) == 0.0) dir = {1.0, 0.0};
  return zone.centre + dir * zone.radius;
}

inline Vec2 exit_point_for(const ZonePose& zone, const Classification& c, Vec2 p) {
  return c.crossing.value_or(radial_projection(zone, p));
}

}  // namespace detail

// Pure position control; the device never leaves the zone for this technique.
inline StepResult step_position(const EngineConfig& cfg, EngineState state, Vec2 p, double dt) {
  detail::require_dt(dt);
  const Vec2 from = state.last_device;
  return detail::isotonic_step(cfg, std::move(state), p, from, dt);
}

inline StepResult step_baseline(const EngineConfig& cfg, EngineState state, Vec2 p, double dt) {
  detail::require_dt(dt);
  const Classification cls = classify(p, state.zone, state.last_device);
  if (cls.region == Region::Inside) {
    Vec2 from = state.last_device;
    if (state.mode == Mode::Elastic) {
      from = detail::exit_point_for(state.zone, cls, p);
      detail::leave_elastic(state);
    }
    return detail::isotonic_step(cfg, std::move(state), p, from, dt);
  }
  if (state.mode == Mode::Isotonic) {
    detail::enter_elastic(state, detail::exit_point_for(state.zone, cls, p), state.last_display_velocity);
  } else {
    state.time_since_exit += dt;
  }
  const Vec2 delta = baseline_velocity(cfg.elastic, state.zone, p) * dt;
  return detail::finish(std::move(state), p, delta, dt);
}

inline StepResult step_rubberedge(const EngineConfig& cfg, EngineState state, Vec2 p, double dt) {
  detail::require_dt(dt);
  const Classification cls = classify(p, state.zone, state.last_device);
  if (cls.region == Region::Inside) {
    Vec2 from = state.last_device;
    if (state.mode == Mode::Elastic) {
      from = detail::exit_point_for(state.zone, cls, p);
      detail::leave_elastic(state);
    }
    return detail::isotonic_step(cfg, std::move(state), p, from, dt);
  }

  Vec2 delta;
  if (state.mode == Mode::Isotonic) {
    // First elastic frame is evaluated at t = 0.
    detail::enter_elastic(state, detail::exit_point_for(state.zone, cls, p), state.last_display_velocity);
    delta = rubberedge_velocity(cfg, state, p) * dt;
  } else {
    const double n = std::max(1.0, std::ceil(dt / cfg.max_step - 1e-9));
    const double h = dt / n;
    for (int i = 0; i < static_cast<int>(n); ++i) {
      state.time_since_exit += h;
      state.zone = integrate_boundary(state.zone, p, h, cfg.elastic.spring_k);
      delta += rubberedge_velocity(cfg, state, p) * h;
    }
  }
  return detail::finish(std::move(state), p, delta, dt);
}

inline StepResult step_technique(const EngineConfig& cfg, EngineState state, Vec2 p, double dt) {
  switch (cfg.technique) {
    case Technique::Position:
      return step_position(cfg, std::move(state), p, dt);
    case Technique::Baseline:
      return step_baseline(cfg, std::move(state), p, dt);
    case Technique::RubberEdge:
      return step_rubberedge(cfg, std::move(state), p, dt);
  }
  throw ConfigError("unknown technique");
}

// One timestamped device sample.
struct ControlFrame {
  double t = 0.0;  // s
  Vec2 position;   // device mm
  bool contact = true;
};

struct StepOutput {
  Vec2 delta;            // display mm
  Mode mode = Mode::Isotonic;
  double penetration = 0.0;  // mm beyond the physical boundary
  std::optional<Vec2> exit_point;
};

// Frame-driven engine. Handles timing, contact (clutching rebases the relative
// mapping and cancels any elastic excursion) and dispatches to the technique.
class Engine {
 public:
  explicit Engine(EngineConfig config, Vec2 pointer_start = {}) : config_(std::move(config)) {
    if (config_.calibration) {
      config_.zone.centre = config_.calibration->boundary().centre;
      const double mass = config_.zone.mass;
      const double r_m = config_.calibration->boundary().radius * 1e-3;
      config_.zone.radius = config_.calibration->boundary().radius;
      config_.zone.moment_of_inertia = 0.5 * mass * r_m * r_m;
    }
    config_.validate();
    state_.zone = config_.zone;
    state_.pointer = pointer_start;
    state_.smoother = SpeedSmoother(config_.speed_smoothing);
  }

  StepOutput step(const ControlFrame& frame) {
    const Vec2 p = frame.position;
    if (!std::isfinite(frame.t) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ArgumentError("frame fields must be finite");
    }
    if (!state_.primed) {
      state_.primed = true;
      state_.last_time = frame.t;
      state_.contact = false;
      if (frame.contact) touch_down(p);
      return output({});
    }
    const double dt = frame.t - state_.last_time;
    if (!(dt > 0.0)) throw ArgumentError("frame timestamps must be strictly increasing");
    state_.last_time = frame.t;

    if (!frame.contact) {
      if (state_.contact) lift();
      return output({});
    }
    if (!state_.contact) {
      touch_down(p);
      return output({});
    }
    StepResult r = step_technique(config_, std::move(state_), p, dt);
    state_ = std::move(r.state);
    return output(r.display_delta);
  }

  const EngineState& state() const { return state_; }
  const EngineConfig& config() const { return config_; }

 private:
  bool hybrid() const { return config_.technique != Technique::Position; }

  void touch_down(Vec2 p) {
    state_.contact = true;
    state_.last_device = p;
    state_.last_display_velocity = {};
    state_.smoother.reset();
    if (hybrid() && classify(p, state_.zone).region == Region::Outside) {
      detail::enter_elastic(state_, detail::radial_projection(state_.zone, p), {});
    }
  }

  void lift() {
    state_.contact = false;
    state_.last_display_velocity = {};
    if (state_.mode == Mode::Elastic) detail::leave_elastic(state_);
    state_.smoother.reset();
  }

  StepOutput output(Vec2 delta) const {
    StepOutput o;
    o.delta = delta;
    o.mode = state_.mode;
    if (hybrid() && state_.contact) {
      o.penetration = std::max(0.0, norm(state_.last_device - state_.zone.centre) - state_.zone.radius);
    }
    if (state_.mode == Mode::Elastic) o.exit_point = state_.zone.exit_point;
    return o;
  }

  EngineConfig config_;
  EngineState state_;
};

}  // namespace rubberedge
