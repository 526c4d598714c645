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

// Two-step device calibration: fit the isotonic boundary circle from a traced
// perimeter, then record the maximum penetration reached by radial pushes in
// eight directions. Rate control later normalises penetration against this
// direction-dependent maximum.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rubberedge/errors.hpp"
#include "rubberedge/geometry.hpp"

namespace rubberedge {

struct CircleFit {
  Circle circle;
  double rms_residual = 0.0;  // mm, geometric
};

namespace detail {

// Largest angular gap (degrees) between consecutive headings of `points`
// seen from `centre`.
inline double largest_angular_gap(std::span<const Vec2> points, Vec2 centre) {
  std::vector<double> headings;
  headings.reserve(points.size());
  for (Vec2 p : points) headings.push_back(heading_deg(p - centre));
  std::sort(headings.begin(), headings.end());
  double gap = 360.0 - headings.back() + headings.front();
  for (std::size_t i = 1; i < headings.size(); ++i) {
    gap = std::max(gap, headings[i] - headings[i - 1]);
  }
  return gap;
}

}  // namespace detail

// Least-squares circle through a traced perimeter. Algebraic (Kasa) fit on
// centred coordinates, then one Gauss-Newton pass on the geometric residuals.
inline CircleFit fit_boundary(std::span<const Vec2> trace) {
  if (trace.size() < 8) throw CalibrationError("boundary trace needs at least 8 points");

  Vec2 mean;
  for (Vec2 p : trace) mean += p;
  mean = mean / static_cast<double>(trace.size());

  // x^2 + y^2 + D x + E y + F = 0 in coordinates relative to the mean.
  Eigen::MatrixXd a(trace.size(), 3);
  Eigen::VectorXd b(trace.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Vec2 q = trace[i] - mean;
    a(i, 0) = q.x;
    a(i, 1) = q.y;
    a(i, 2) = 1.0;
    b(i) = -(q.x * q.x + q.y * q.y);
    scale = std::max(scale, norm(q));
  }
  if (scale == 0.0) throw CalibrationError("boundary trace points are all identical");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw CalibrationError("boundary trace is degenerate (collinear points)");
  const Eigen::Vector3d sol = qr.solve(b);

  Vec2 centre{-sol(0) / 2.0, -sol(1) / 2.0};
  const double r2 = centre.x * centre.x + centre.y * centre.y - sol(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) throw CalibrationError("boundary trace does not describe a circle");
  double radius = std::sqrt(r2);
  if (radius > 1e6 * scale) throw CalibrationError("boundary trace is degenerate (collinear points)");

  // Gauss-Newton on r_i = |q_i - c| - R.
  Eigen::MatrixXd jac(trace.size(), 3);
  Eigen::VectorXd res(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Vec2 diff = (trace[i] - mean) - centre;
    const double dist = norm(diff);
    if (dist == 0.0) throw CalibrationError("trace point coincides with the fitted centre");
    jac(i, 0) = -diff.x / dist;
    jac(i, 1) = -diff.y / dist;
    jac(i, 2) = -1.0;
    res(i) = dist - radius;
  }
  const Eigen::Vector3d step = jac.colPivHouseholderQr().solve(-res);
  centre += Vec2{step(0), step(1)};
  radius += step(2);

  CircleFit fit;
  fit.circle = {centre + mean, radius};
  double ss = 0.0;
  for (Vec2 p : trace) {
    const double r = distance(p, fit.circle.centre) - radius;
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(trace.size()));

  if (detail::largest_angular_gap(trace, fit.circle.centre) > 90.0) {
    throw CalibrationError("boundary trace covers less than 270 degrees");
  }
  return fit;
}

// One radial push: nominal direction (a multiple of 45 degrees) and the
// deepest device point reached.
struct RadialPush {
  double nominal_angle_deg = 0.0;
  Vec2 point;
};

struct PenetrationSample {
  double angle_deg = 0.0;        // measured heading of the push, [0, 360)
  double max_penetration = 0.0;  // mm beyond the boundary
};

// Direction-dependent maximum penetration around a calibrated boundary.
class ForceProfile {
 public:
  ForceProfile(Circle boundary, std::array<PenetrationSample, 8> samples)
      : boundary_(boundary), samples_(samples) {
    if (!(boundary_.radius > 0.0)) throw CalibrationError("boundary radius must be positive");
    std::sort(samples_.begin(), samples_.end(),
              [](const auto& l, const auto& r) { return l.angle_deg < r.angle_deg; });
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!(samples_[i].max_penetration > 0.0)) {
        throw CalibrationError("calibrated penetrations must be positive");
      }
      if (samples_[i].angle_deg < 0.0 || samples_[i].angle_deg >= 360.0) {
        throw CalibrationError("sample angles must lie in [0, 360)");
      }
      if (i > 0 && !(samples_[i].angle_deg > samples_[i - 1].angle_deg)) {
        throw CalibrationError("sample angles must be distinct");
      }
    }
  }

  const Circle& boundary() const { return boundary_; }
  const std::array<PenetrationSample, 8>& samples() const { return samples_; }

  // Maximum penetration toward heading `angle_deg`, linear in angle between
  // neighbouring samples and periodic over 360 degrees.
  double max_penetration(double angle_deg) const {
    double a = std::fmod(angle_deg, 360.0);
    if (a < 0.0) a += 360.0;
    const std::size_t n = samples_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& lo = samples_[i];
      const auto& hi = samples_[(i + 1) % n];
      double span = hi.angle_deg - lo.angle_deg;
      double off = a - lo.angle_deg;
      if (i + 1 == n) {
        span += 360.0;
        if (off < 0.0) off += 360.0;
      }
      if (off >= 0.0 && off <= span) {
        return lo.max_penetration + (off / span) * (hi.max_penetration - lo.max_penetration);
      }
    }
    return samples_.front().max_penetration;  // unreachable for a valid profile
  }

 private:
  Circle boundary_;
  std::array<PenetrationSample, 8> samples_;
};

inline ForceProfile build_force_profile(const Circle& boundary, std::span<const RadialPush> pushes) {
  if (pushes.size() != 8) throw CalibrationError("force profile needs exactly 8 radial pushes");
  std::array<bool, 8> seen{};
  std::array<PenetrationSample, 8> samples{};
  for (std::size_t i = 0; i < pushes.size(); ++i) {
    const auto& push = pushes[i];
    const double slot_f = push.nominal_angle_deg / 45.0;
    const long slot = std::lround(slot_f);
    if (std::abs(slot_f - static_cast<double>(slot)) > 1e-9 || slot < 0 || slot > 7) {
      throw CalibrationError("push angles must be multiples of 45 degrees in [0, 360)");
    }
    if (seen[static_cast<std::size_t>(slot)]) throw CalibrationError("duplicate push direction");
    seen[static_cast<std::size_t>(slot)] = true;

    const Vec2 radial = push.point - boundary.centre;
    const double penetration = norm(radial) - boundary.radius;
    if (!(penetration > 0.0)) throw CalibrationError("push point lies inside the boundary");

    const double heading = heading_deg(radial);
    double off = std::fmod(heading - push.nominal_angle_deg + 540.0, 360.0) - 180.0;
    if (std::abs(off) > 22.5) throw CalibrationError("push point lies outside its 45 degree sector");
    samples[i] = {heading, penetration};
  }
  return ForceProfile(boundary, samples);
}

// Penetration of P beyond the boundary as a fraction of the calibrated
// maximum in P's direction, clamped to [0, 1].
inline double normalized_penetration(Vec2 p, const ForceProfile& profile) {
  const Circle& c = profile.boundary();
  const Vec2 radial = p - c.centre;
  const double penetration = norm(radial) - c.radius;
  if (penetration < -1e-12 * c.radius) throw DomainError("point lies strictly inside the boundary");
  if (penetration <= 0.0) return 0.0;
  return std::clamp(penetration / profile.max_penetration(heading_deg(radial)), 0.0, 1.0);
}

}  // namespace rubberedge
