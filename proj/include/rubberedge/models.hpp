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

// Closed-form selection-time models for clutched position control and hybrid
// position/rate control, plus the Fitts' law utilities they rest on.

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rubberedge/errors.hpp"

namespace rubberedge::models {

// How the b coefficient of a Fitts' law fit is read.
enum class CoefficientReading {
  SlopeSecondsPerBit,       // T = a + b ID
  ThroughputBitsPerSecond,  // T = a + ID / b
};

// Clutch count for a distance D with effective range d_e.
enum class ClutchCountRule {
  CeilEngagements,  // ceil(D / d_e) - 1
  FloorRatio,       // floor(D / d_e)
};

struct FittsLaw {
  double a = 0.0;  // s
  double b = 1.0;
};

struct ModelParams {
  double operating_range = 40.0;  // d, mm
  double cd_gain = 2.0;
  double utilization = 0.75;      // c
  double clutch_time = 0.2;       // T_C, s
  FittsLaw isotonic{0.0, 4.5};
  FittsLaw elastic{0.0, 2.0};
  CoefficientReading reading = CoefficientReading::ThroughputBitsPerSecond;
  ClutchCountRule clutch_rule = ClutchCountRule::CeilEngagements;
  double display_diagonal = 380.0;  // mm

  // d_e = c d CD
  double effective_range() const { return utilization * operating_range * cd_gain; }
  // Display distance reachable without leaving the isotonic zone, CD d.
  double isotonic_reach() const { return cd_gain * operating_range; }

  void validate() const {
    if (!(operating_range > 0.0)) throw ConfigError("operating range d must be > 0");
    if (!(cd_gain > 0.0)) throw ConfigError("CD gain must be > 0");
    if (!(utilization > 0.0 && utilization <= 1.0)) throw ConfigError("utilization c must be in (0, 1]");
    if (!(clutch_time >= 0.0)) throw ConfigError("clutch time must be >= 0");
    if (reading == CoefficientReading::ThroughputBitsPerSecond && (!(isotonic.b > 0.0) || !(elastic.b > 0.0))) {
      throw ConfigError("throughput coefficients must be > 0");
    }
  }
};

struct DeviceProfile {
  std::string name;
  ModelParams params;
  double display_width = 0.0;   // mm
  double display_height = 0.0;  // mm
};

// Touch-pad laptop: 4 cm pad, 38 cm 4:3 display.
inline DeviceProfile laptop_profile() {
  DeviceProfile p{"laptop", {}, 304.0, 228.0};
  p.params.operating_range = 40.0;
  p.params.display_diagonal = 380.0;
  return p;
}

// PDA: 1 cm pad, 10 cm 3:4 display.
inline DeviceProfile pda_profile() {
  DeviceProfile p{"pda", {}, 60.0, 80.0};
  p.params.operating_range = 10.0;
  p.params.display_diagonal = 100.0;
  return p;
}

// Desk setup used for the reciprocal-pointing simulations: 40 mm zone and two
// 19 inch monitors side by side.
inline DeviceProfile experiment_profile() {
  DeviceProfile p{"experiment", {}, 765.0, 306.0};
  p.params.operating_range = 40.0;
  p.params.display_diagonal = std::hypot(765.0, 306.0);
  return p;
}

inline std::optional<DeviceProfile> find_profile(const std::string& name) {
  if (name == "laptop") return laptop_profile();
  if (name == "pda") return pda_profile();
  if (name == "experiment") return experiment_profile();
  return std::nullopt;
}

struct Prediction {
  double total = 0.0;     // T = T1 + T2
  double first = 0.0;     // T1
  double second = 0.0;    // T2
  long clutches = 0;      // N
  double residual = 0.0;  // D2, mm
};

inline double index_of_difficulty(double distance, double width) {
  return std::log2(distance / width + 1.0);
}

inline double fitts_time(double distance, double width, FittsLaw coeffs,
                         CoefficientReading reading = CoefficientReading::ThroughputBitsPerSecond) {
  if (!(distance >= 0.0)) throw ArgumentError("fitts_time: distance must be >= 0");
  if (!(width > 0.0)) throw ArgumentError("fitts_time: width must be > 0");
  const double id = index_of_difficulty(distance, width);
  if (reading == CoefficientReading::SlopeSecondsPerBit) return coeffs.a + coeffs.b * id;
  return coeffs.a + id / coeffs.b;
}

namespace detail {
// D / d_e with products such as 0.7*40*2 snapped onto exact multiples.
inline double range_ratio(double distance, const ModelParams& p) {
  const double ratio = distance / p.effective_range();
  const double nearest = std::round(ratio);
  return std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest : ratio;
}
}  // namespace detail

// Device engagements needed to cover D: ceil(D / d_e).
inline long invocations(double distance, const ModelParams& p) {
  if (!(distance > 0.0)) throw ArgumentError("invocations: distance must be > 0");
  return static_cast<long>(std::ceil(detail::range_ratio(distance, p)));
}

inline long clutch_count(double distance, const ModelParams& p) {
  if (p.clutch_rule == ClutchCountRule::FloorRatio) {
    if (!(distance > 0.0)) throw ArgumentError("clutch_count: distance must be > 0");
    return static_cast<long>(std::floor(detail::range_ratio(distance, p)));
  }
  return invocations(distance, p) - 1;
}

inline Prediction clutching_time(double distance, double width, const ModelParams& p) {
  if (!(distance > 0.0) || !(width > 0.0)) throw ArgumentError("clutching_time: D and W must be > 0");
  Prediction out;
  out.clutches = clutch_count(distance, p);
  out.first = 2.0 * static_cast<double>(out.clutches) * p.clutch_time;
  out.residual = std::max(0.0, distance - static_cast<double>(out.clutches) * p.effective_range());
  out.second = fitts_time(out.residual, width, p.isotonic, p.reading);
  out.total = out.first + out.second;
  return out;
}

inline Prediction hybrid_time(double distance, double width, const ModelParams& p) {
  if (!(distance > 0.0) || !(width > 0.0)) throw ArgumentError("hybrid_time: D and W must be > 0");
  Prediction out;
  if (distance <= p.isotonic_reach()) {
    out.first = fitts_time(distance, width, p.isotonic, p.reading);
    out.total = out.first;
    return out;
  }
  out.first = p.clutch_time;
  out.residual = distance - p.isotonic_reach();
  out.second = fitts_time(out.residual, width, p.elastic, p.reading);
  out.total = out.first + out.second;
  return out;
}

// The hybrid model switches branch at D = CD d; the two branches disagree
// there.
struct BranchDiscontinuity {
  double distance = 0.0;
  double isotonic_branch = 0.0;  // Fitts time of the whole distance
  double elastic_branch = 0.0;   // limit T_C + a_e from above
  double jump() const { return elastic_branch - isotonic_branch; }
};

inline BranchDiscontinuity hybrid_discontinuity(double width, const ModelParams& p) {
  BranchDiscontinuity d;
  d.distance = p.isotonic_reach();
  d.isotonic_branch = fitts_time(d.distance, width, p.isotonic, p.reading);
  d.elastic_branch = p.clutch_time + p.elastic.a;
  return d;
}

struct ScanRange {
  double first = 1.0;  // mm
  double last = 0.0;   // mm; <= 0 means twice the display diagonal
  double step = 1.0;   // mm
};

// Smallest scanned D from which hybrid control is faster than clutched
// position control for every larger scanned D.
inline std::optional<double> crossover_distance(double width, const ModelParams& p, ScanRange range = {}) {
  if (!(width > 0.0)) throw ArgumentError("crossover_distance: width must be > 0");
  if (range.last <= 0.0) range.last = 2.0 * p.display_diagonal;
  if (!(range.step > 0.0) || !(range.first > 0.0) || range.last < range.first) {
    throw ConfigError("invalid crossover scan range");
  }
  const long count = static_cast<long>(std::floor((range.last - range.first) / range.step + 1e-9)) + 1;
  std::optional<double> candidate;
  for (long i = 0; i < count; ++i) {
    const double d = range.first + static_cast<double>(i) * range.step;
    const bool hybrid_wins = hybrid_time(d, width, p).total < clutching_time(d, width, p).total;
    if (!hybrid_wins) {
      candidate.reset();
    } else if (!candidate) {
      candidate = d;
    }
  }
  return candidate;
}

struct SweepRow {
  double distance = 0.0;
  double width = 0.0;
  std::string technique;  // "clutching" or "hybrid"
  Prediction prediction;
};

inline std::vector<SweepRow> sweep(double width, const ModelParams& p, ScanRange range = {}) {
  if (range.last <= 0.0) range.last = 2.0 * p.display_diagonal;
  std::vector<SweepRow> rows;
  const long count = static_cast<long>(std::floor((range.last - range.first) / range.step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) {
    const double d = range.first + static_cast<double>(i) * range.step;
    rows.push_back({d, width, "clutching", clutching_time(d, width, p)});
    rows.push_back({d, width, "hybrid", hybrid_time(d, width, p)});
  }
  return rows;
}

// W_e = 4.133 x sample standard deviation of signed endpoint offsets.
inline double effective_width(std::span<const double> endpoints) {
  if (endpoints.size() < 2) throw ArgumentError("effective_width needs at least 2 endpoints");
  double mean = 0.0;
  for (double e : endpoints) mean += e;
  mean /= static_cast<double>(endpoints.size());
  double ss = 0.0;
  for (double e : endpoints) ss += (e - mean) * (e - mean);
  return 4.133 * std::sqrt(ss / static_cast<double>(endpoints.size() - 1));
}

struct FittsObservation {
  double id = 0.0;    // bits
  double time = 0.0;  // s
};

struct FittsFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares of T on ID.
inline FittsFit fitts_regression(std::span<const FittsObservation> obs) {
  if (obs.size() < 2) throw ArgumentError("fitts_regression needs at least 2 observations");
  const double n = static_cast<double>(obs.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& o : obs) {
    mx += o.id;
    my += o.time;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& o : obs) {
    sxx += (o.id - mx) * (o.id - mx);
    sxy += (o.id - mx) * (o.time - my);
    syy += (o.time - my) * (o.time - my);
  }
  if (sxx <= 1e-15 * std::max(1.0, mx * mx) * n) {
    throw DegenerateInputError("fitts_regression: all IDs are equal");
  }
  FittsFit fit;
  fit.b = sxy / sxx;
  fit.a = my - fit.b * mx;
  double ss_res = 0.0;
  for (const auto& o : obs) {
    const double r = o.time - (fit.a + fit.b * o.id);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace rubberedge::models
