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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rubberedge/hybrid.hpp"
#include "rubberedge/simkit.hpp"

namespace rubberedge {
namespace {

EngineConfig config(Technique t) {
  EngineConfig cfg;
  cfg.technique = t;
  return cfg;
}

EngineState primed_state(const EngineConfig& cfg, Vec2 device) {
  EngineState s;
  s.zone = cfg.zone;
  s.last_device = device;
  s.contact = true;
  s.primed = true;
  return s;
}

// Drives an engine through straight-line frames at 1 kHz.
std::vector<StepOutput> run_frames(Engine& e, const std::vector<ControlFrame>& frames) {
  std::vector<StepOutput> out;
  for (const auto& f : frames) out.push_back(e.step(f));
  return out;
}

TEST(Classify, CentreAndBoundaryAreInside) {
  const auto zone = ZonePose::disc({0, 0}, 20);
  EXPECT_EQ(classify({0, 0}, zone).region, Region::Inside);
  EXPECT_EQ(classify({20, 0}, zone).region, Region::Inside);
  EXPECT_EQ(classify({0, -20}, zone).region, Region::Inside);
  EXPECT_EQ(classify({20.000001, 0}, zone).region, Region::Outside);
}

TEST(Classify, ExitPointMatchesQuadraticOracle) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto zone = ZonePose::disc({2, -1}, 20);
  for (int i = 0; i < 200; ++i) {
    const Vec2 prev = zone.centre + from_polar(19.0 * std::abs(u(gen)), 3.2 * u(gen));
    const Vec2 p = zone.centre + from_polar(20.5 + 5.0 * std::abs(u(gen)), 3.2 * u(gen));
    const auto c = classify(p, zone, prev);
    ASSERT_EQ(c.region, Region::Outside);
    ASSERT_TRUE(c.crossing.has_value());
    const double s = oracle::exit_parameter({prev.x, prev.y}, {p.x, p.y}, {zone.centre.x, zone.centre.y}, 20.0);
    const Vec2 expected = prev + (p - prev) * s;
    EXPECT_NEAR(c.crossing->x, expected.x, 1e-9);
    EXPECT_NEAR(c.crossing->y, expected.y, 1e-9);
    const Vec2 q = *c.crossing - zone.centre;
    EXPECT_NEAR(q.x * q.x + q.y * q.y, 400.0, 1e-9);
  }
}

TEST(Classify, NoCrossingWhileInside) {
  const auto zone = ZonePose::disc({0, 0}, 20);
  EXPECT_FALSE(classify({5, 5}, zone, Vec2{1, 1}).crossing.has_value());
}

TEST(StepBaseline, InsideIsPositionControl) {
  const auto cfg = config(Technique::Baseline);
  const auto r = step_baseline(cfg, primed_state(cfg, {0, 0}), {1, 0}, 1e-3);
  EXPECT_DOUBLE_EQ(r.display_delta.x, 2.0);
  EXPECT_DOUBLE_EQ(r.display_delta.y, 0.0);
  EXPECT_EQ(r.state.mode, Mode::Isotonic);
}

TEST(StepBaseline, CubicRateAtOneMillimetre) {
  const auto cfg = config(Technique::Baseline);
  const Vec2 p = from_polar(21.0, 0.7);
  const Vec2 v = baseline_velocity(cfg.elastic, cfg.zone, p);
  // 0.03 * (200 N/m * 1 mm)^3 = 2.4e-4 m/s.
  EXPECT_NEAR(norm(v), 0.24, 1e-12);
  EXPECT_NEAR(cross(v, p), 0.0, 1e-12);
  EXPECT_GT(dot(v, p), 0.0);
}

TEST(StepBaseline, VelocityIsZeroAtTheBoundary) {
  const auto cfg = config(Technique::Baseline);
  EXPECT_EQ(norm(baseline_velocity(cfg.elastic, cfg.zone, from_polar(20.0, 1.1))), 0.0);
}

TEST(StepBaseline, DirectionIsRadialRegardlessOfApproach) {
  const auto cfg = config(Technique::Baseline);
  Engine e(cfg);
  simkit::CrossingSpec spec;
  spec.off_radial_deg = 40.0;
  spec.boundary_angle = 0.0;
  const auto out = run_frames(e, simkit::crossing_script(cfg.zone, spec));
  const Vec2 last = out.back().delta;
  ASSERT_GT(norm(last), 0.0);
  EXPECT_NEAR(rad_to_deg(angle_between(last, e.state().last_device - cfg.zone.centre)), 0.0, 1e-9);
}

TEST(StepRubberEdge, TransitionSpeedEqualsPreTransitionSpeed) {
  const auto cfg = config(Technique::RubberEdge);
  EngineState s = primed_state(cfg, {19.95, 0.3});
  s.last_display_velocity = {120.0, 40.0};
  const auto r = step_rubberedge(cfg, s, {20.05, 0.35}, 1e-3);
  ASSERT_EQ(r.state.mode, Mode::Elastic);
  EXPECT_DOUBLE_EQ(r.state.time_since_exit, 0.0);
  EXPECT_NEAR(norm(r.display_delta) / 1e-3, std::hypot(120.0, 40.0), 1e-9);
}

TEST(StepRubberEdge, HeldPushApproachesRateAsymptote) {
  const auto cfg = config(Technique::RubberEdge);
  Engine e(cfg);
  // Radial push along +x: torque is zero so N stays put at (20, 0).
  e.step({0.0, {19.0, 0.0}, true});
  for (int k = 1; k <= 10; ++k) e.step({k * 1e-3, {19.0 + 0.2 * k, 0.0}, true});
  StepOutput o;
  for (int k = 11; k <= 10000; ++k) o = e.step({k * 1e-3, {21.0, 0.0}, true});
  ASSERT_EQ(o.mode, Mode::Elastic);
  EXPECT_NEAR(o.exit_point->x, 20.0, 1e-9);
  EXPECT_NEAR(norm(o.delta) / 1e-3, cfg.elastic.rate_gain * 1.0, 1e-6);
}

TEST(StepRubberEdge, RadialApproachKeepsTheSameLine) {
  const auto cfg = config(Technique::RubberEdge);
  Engine e(cfg);
  const Vec2 u = normalized(Vec2{3, 4});
  std::vector<ControlFrame> frames;
  for (int k = 0; k <= 400; ++k) {
    const double s = std::min(-10.0 + 0.1 * k, 21.5);
    frames.push_back({k * 1e-3, u * s, true});
  }
  for (const auto& o : run_frames(e, frames)) {
    if (norm(o.delta) == 0.0) continue;
    EXPECT_NEAR(cross(o.delta, u), 0.0, 1e-12);
    EXPECT_GT(dot(o.delta, u), 0.0);
  }
  EXPECT_EQ(e.state().mode, Mode::Elastic);
}

TEST(StepRubberEdge, ZeroNpGivesZeroVelocity) {
  auto cfg = config(Technique::RubberEdge);
  EngineState s = primed_state(cfg, {20.5, 0});
  s.mode = Mode::Elastic;
  s.zone.exit_point = {20.5, 0};  // degenerate on purpose
  EXPECT_EQ(norm(rubberedge_velocity(cfg, s, {20.5, 0})), 0.0);
}

TEST(StepRubberEdge, TangentialPushStaysBounded) {
  const auto cfg = config(Technique::RubberEdge);
  EngineState s = primed_state(cfg, {20.0, 0.0});
  s.mode = Mode::Elastic;
  s.zone.exit_point = {20.0, 0.0};
  s.pre_transition_velocity = {0.0, 90.0};
  const double bound = std::max(90.0, cfg.elastic.rate_gain * cfg.elastic.max_penetration);
  for (int k = 0; k < 3000; ++k) {
    const Vec2 p{20.0 + 1e-6, 0.2 * k * 1e-3 * 30.0};
    auto r = step_rubberedge(cfg, s, p, 1e-3);
    s = r.state;
    ASSERT_TRUE(std::isfinite(r.display_delta.x) && std::isfinite(r.display_delta.y));
    ASSERT_LE(norm(r.display_delta) / 1e-3, bound + 1e-9);
  }
}

TEST(StepRubberEdge, ReentryRestoresPositionControl) {
  const auto cfg = config(Technique::RubberEdge);
  Engine e(cfg);
  e.step({0.000, {19.0, 0}, true});
  e.step({0.001, {21.0, 0}, true});
  ASSERT_EQ(e.state().mode, Mode::Elastic);
  e.step({0.002, {21.5, 0}, true});
  const auto o = e.step({0.003, {18.0, 0}, true});
  EXPECT_EQ(o.mode, Mode::Isotonic);
  EXPECT_DOUBLE_EQ(e.state().time_since_exit, 0.0);
  EXPECT_EQ(norm(e.state().pre_transition_velocity), 0.0);
  // Position control from the re-entry point (20, 0) to P.
  EXPECT_NEAR(o.delta.x, -4.0, 1e-12);
  EXPECT_FALSE(o.exit_point.has_value());
}

TEST(StepFunctions, RejectNonPositiveDt) {
  for (Technique t : {Technique::Position, Technique::Baseline, Technique::RubberEdge}) {
    const auto cfg = config(t);
    EXPECT_THROW(step_technique(cfg, primed_state(cfg, {}), {1, 0}, 0.0), ArgumentError);
    EXPECT_THROW(step_technique(cfg, primed_state(cfg, {}), {1, 0}, -1e-3), ArgumentError);
  }
  EXPECT_THROW(integrate_boundary(ZonePose::disc({}, 20), {25, 0}, 0.0), ArgumentError);
}

TEST(IntegrateBoundary, AlignedPushHasNoTorque) {
  auto z = ZonePose::disc({}, 20);
  z.exit_point = {0, 20};
  const auto next = integrate_boundary(z, {0, 23}, 1e-3);
  EXPECT_EQ(next.angular_velocity, 0.0);
  EXPECT_NEAR(next.exit_point.x, 0.0, 1e-15);
}

TEST(IntegrateBoundary, FreeDecayMatchesAnalyticSolution) {
  auto z = ZonePose::disc({}, 20);
  z.angular_velocity = 2.0;
  const double t_end = z.moment_of_inertia / z.friction;
  const int steps = static_cast<int>(std::lround(t_end / 1e-3));
  for (int k = 0; k < steps; ++k) z = integrate_boundary(z, z.exit_point, 1e-3);
  const double expected = oracle::omega_decay(2.0, 3e-3, 2e-4, steps * 1e-3);
  EXPECT_NEAR(z.angular_velocity / expected, 1.0, 1e-3);
  EXPECT_NEAR(norm(z.exit_point - z.centre), 20.0, 1e-9);
}

TEST(IntegrateBoundary, PerpendicularPushAlignsTheExitPoint) {
  auto z = ZonePose::disc({}, 20);
  z.exit_point = {20, 0};
  const Vec2 p{20, 5};
  const double initial = std::abs(cross(z.exit_point - z.centre, p - z.exit_point));
  for (int k = 0; k < 2000; ++k) z = integrate_boundary(z, p, 1e-3);
  const double final_ = std::abs(cross(z.exit_point - z.centre, p - z.exit_point));
  EXPECT_LT(final_, 1e-4 * initial);
}

TEST(IntegrateBoundary, ExitPointStaysOnCircle) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi), pen(0.0, 4.0);
  auto z = ZonePose::disc({3, 4}, 20);
  for (int k = 0; k < 20000; ++k) {
    const Vec2 p = z.centre + from_polar(20.0 + pen(gen), ang(gen));
    z = integrate_boundary(z, p, 1e-3);
    ASSERT_NEAR(norm(z.exit_point - z.centre), 20.0, 1e-9);
  }
}

TEST(ElasticParams, MixingReadings) {
  ElasticParams e;
  EXPECT_NEAR(e.pre_transition_weight(0.3), std::exp(-1.0), 1e-15);
  e.mixing_reading = MixingReading::Rate;
  EXPECT_NEAR(e.pre_transition_weight(0.3), std::exp(-0.09), 1e-15);
}

TEST(ElasticParams, VectorMixingKeepsV0AtTransition) {
  auto cfg = config(Technique::RubberEdge);
  cfg.elastic.mixing = VelocityMixing::Vector;
  EngineState s = primed_state(cfg, {19.9, 0});
  s.last_display_velocity = {50, 30};
  const auto r = step_rubberedge(cfg, s, {20.1, 0.1}, 1e-3);
  EXPECT_NEAR(r.display_delta.x, 0.05, 1e-12);
  EXPECT_NEAR(r.display_delta.y, 0.03, 1e-12);
}

TEST(Engine, RequiresIncreasingTimestamps) {
  Engine e(config(Technique::RubberEdge));
  e.step({0.0, {0, 0}, true});
  e.step({0.001, {0.1, 0}, true});
  EXPECT_THROW(e.step({0.001, {0.2, 0}, true}), ArgumentError);
  EXPECT_THROW(e.step({0.0005, {0.2, 0}, true}), ArgumentError);
  // The engine survives the rejected frames.
  const auto o = e.step({0.002, {0.2, 0}, true});
  EXPECT_NEAR(o.delta.x, 0.2, 1e-12);
}

TEST(Engine, ClutchingRebasesAndCancelsElastic) {
  Engine e(config(Technique::RubberEdge), {100, 100});
  e.step({0.000, {19.0, 0}, true});
  e.step({0.001, {21.0, 0}, true});
  ASSERT_EQ(e.state().mode, Mode::Elastic);
  auto o = e.step({0.002, {21.0, 0}, false});
  EXPECT_EQ(o.mode, Mode::Isotonic);
  EXPECT_EQ(norm(o.delta), 0.0);
  o = e.step({0.100, {-5, -5}, false});
  EXPECT_EQ(norm(o.delta), 0.0);
  const Vec2 before = e.state().pointer;
  o = e.step({0.200, {0, 0}, true});
  EXPECT_EQ(norm(o.delta), 0.0);
  o = e.step({0.201, {1, 0}, true});
  EXPECT_NEAR(o.delta.x, 2.0, 1e-12);
  EXPECT_NEAR(e.state().pointer.x - before.x, 2.0, 1e-12);
}

TEST(Engine, TouchDownOutsideStartsElasticWithRadialExitPoint) {
  Engine e(config(Technique::RubberEdge));
  e.step({0.0, {0, 0}, false});
  const auto o = e.step({0.01, {0, 22}, true});
  EXPECT_EQ(o.mode, Mode::Elastic);
  ASSERT_TRUE(o.exit_point.has_value());
  EXPECT_NEAR(o.exit_point->x, 0.0, 1e-12);
  EXPECT_NEAR(o.exit_point->y, 20.0, 1e-12);
  EXPECT_NEAR(o.penetration, 2.0, 1e-12);
}

TEST(Engine, PositionTechniqueIgnoresTheZone) {
  Engine e(config(Technique::Position));
  e.step({0.0, {19, 0}, true});
  const auto o = e.step({0.001, {25, 0}, true});
  EXPECT_EQ(o.mode, Mode::Isotonic);
  EXPECT_NEAR(o.delta.x, 12.0, 1e-12);
  EXPECT_EQ(o.penetration, 0.0);
}

TEST(Engine, SubsteppingMatchesFineFrames) {
  // A 4 ms frame with P held equals four 1 ms frames holding the same P.
  const auto cfg = config(Technique::RubberEdge);
  Engine coarse(cfg), fine(cfg);
  for (Engine* e : {&coarse, &fine}) {
    e->step({0.000, {19.5, 0.5}, true});
    e->step({0.001, {20.5, 1.5}, true});
  }
  const auto c = coarse.step({0.005, {21, 3}, true});
  Vec2 sum;
  for (int k = 2; k <= 5; ++k) sum += fine.step({k * 1e-3, {21, 3}, true}).delta;
  EXPECT_NEAR(c.delta.x, sum.x, 1e-12);
  EXPECT_NEAR(c.delta.y, sum.y, 1e-12);
}

TEST(Engine, DeterministicStateTrajectory) {
  const auto cfg = config(Technique::RubberEdge);
  simkit::CrossingSpec spec;
  spec.off_radial_deg = 55.0;
  spec.boundary_angle = 2.0;
  const auto frames = simkit::crossing_script(cfg.zone, spec);
  Engine a(cfg), b(cfg);
  for (const auto& f : frames) {
    const auto oa = a.step(f);
    const auto ob = b.step(f);
    ASSERT_EQ(oa.delta, ob.delta);
    ASSERT_EQ(a.state().zone.exit_point, b.state().zone.exit_point);
    ASSERT_EQ(a.state().zone.angular_velocity, b.state().zone.angular_velocity);
  }
}

TEST(Engine, CalibrationOverridesZoneGeometry) {
  auto cfg = config(Technique::RubberEdge);
  std::array<PenetrationSample, 8> samples;
  for (int i = 0; i < 8; ++i) samples[i] = {45.0 * i, 2.0};
  cfg.calibration = ForceProfile(Circle{{1, 2}, 15}, samples);
  Engine e(cfg);
  EXPECT_EQ(e.config().zone.centre, (Vec2{1, 2}));
  EXPECT_DOUBLE_EQ(e.config().zone.radius, 15.0);
  EXPECT_NEAR(e.config().zone.moment_of_inertia, 0.5 * 1.0 * 0.015 * 0.015, 1e-15);
}

}  // namespace
}  // namespace rubberedge
