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

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rubberedge/errors.hpp"
#include "rubberedge/geometry.hpp"

namespace rubberedge {

// Speed -> control-display gain mapping. Either a constant gain or a
// piecewise-linear table of (device speed mm/s, gain) knots, clamped to the
// end gains outside the knot range.
class GainCurve {
 public:
  enum class Kind { Constant, SpeedTable };

  struct Knot {
    double speed = 0.0;  // mm/s
    double gain = 1.0;
  };

  static GainCurve constant(double gain) {
    if (!(gain > 0.0) || !std::isfinite(gain)) {
      throw ConfigError("constant gain must be a positive finite number");
    }
    GainCurve c;
    c.kind_ = Kind::Constant;
    c.knots_ = {Knot{0.0, gain}};
    return c;
  }

  static GainCurve table(std::vector<Knot> knots) {
    if (knots.empty()) throw ConfigError("gain table has no knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!(knots[i].gain > 0.0) || !std::isfinite(knots[i].gain)) {
        throw ConfigError("gain table knot " + std::to_string(i) + " has a non-positive gain");
      }
      if (!std::isfinite(knots[i].speed) || knots[i].speed < 0.0) {
        throw ConfigError("gain table knot " + std::to_string(i) + " has an invalid speed");
      }
      if (i > 0 && !(knots[i].speed > knots[i - 1].speed)) {
        throw ConfigError("gain table speeds must be strictly increasing");
      }
    }
    GainCurve c;
    c.kind_ = Kind::SpeedTable;
    c.knots_ = std::move(knots);
    return c;
  }

  // Default pointer-acceleration curve: 1.6 at rest rising to 7.3 at 400 mm/s.
  static GainCurve pointer_acceleration() {
    return table({{0.0, 1.6}, {100.0, 3.0}, {200.0, 4.5}, {300.0, 6.0}, {400.0, 7.3}});
  }

  Kind kind() const { return kind_; }
  const std::vector<Knot>& knots() const { return knots_; }
  double constant_gain() const { return knots_.front().gain; }

  // Gain at device speed `speed` (mm/s).
  double operator()(double speed) const {
    if (knots_.empty()) throw ConfigError("gain curve is empty");
    if (!(speed >= 0.0)) throw ArgumentError("speed must be >= 0");
    if (kind_ == Kind::Constant) return knots_.front().gain;
    if (speed <= knots_.front().speed) return knots_.front().gain;
    if (speed >= knots_.back().speed) return knots_.back().gain;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), speed,
                               [](double s, const Knot& k) { return s < k.speed; });
    auto lo = hi - 1;
    const double f = (speed - lo->speed) / (hi->speed - lo->speed);
    return lo->gain + f * (hi->gain - lo->gain);
  }

 private:
  Kind kind_ = Kind::Constant;
  std::vector<Knot> knots_;
};

inline double gain_for_speed(double speed, const GainCurve& curve) { return curve(speed); }

// Scales a device displacement by the gain at its own speed |delta|/dt.
inline Vec2 apply_transfer(Vec2 device_delta, double dt, const GainCurve& curve) {
  if (!(dt > 0.0)) throw ArgumentError("apply_transfer: dt must be > 0");
  return device_delta * curve(norm(device_delta) / dt);
}

// First-order low-pass on device speed. time_constant == 0 passes the raw
// per-frame estimate through unchanged.
class SpeedSmoother {
 public:
  explicit SpeedSmoother(double time_constant = 0.0) : tau_(time_constant) {
    if (!(tau_ >= 0.0)) throw ConfigError("speed smoothing time constant must be >= 0");
  }

  double update(double raw_speed, double dt) {
    if (tau_ == 0.0 || !primed_) {
      value_ = raw_speed;
      primed_ = tau_ != 0.0;
      return value_;
    }
    value_ += (1.0 - std::exp(-dt / tau_)) * (raw_speed - value_);
    return value_;
  }

  void reset() {
    value_ = 0.0;
    primed_ = false;
  }

  double time_constant() const { return tau_; }
  double value() const { return value_; }

 private:
  double tau_ = 0.0;
  double value_ = 0.0;
  bool primed_ = false;
};

}  // namespace rubberedge
