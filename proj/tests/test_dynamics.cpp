// Copyright 2026 The sbsf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sbsf/intersection.hpp"
#include "sbsf/rng.hpp"
#include "sbsf/sequence.hpp"
#include "sbsf/unicycle.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

namespace {

using namespace sbsf;

std::array<double, 2> in(double omega, double accel) { return {omega, accel}; }

TEST(Unicycle, StraightLine) {
  const UnicycleModel m;
  const auto u = in(0, 0);
  const auto n = m.step({0, 0, 0, 1}, u);
  EXPECT_DOUBLE_EQ(n.x, 0.1);
  EXPECT_DOUBLE_EQ(n.y, 0.0);
  EXPECT_DOUBLE_EQ(n.theta, 0.0);
  EXPECT_DOUBLE_EQ(n.v, 1.0);
}

TEST(Unicycle, PureYMotion) {
  const UnicycleModel m;
  const auto u = in(0, 0);
  const auto n = m.step({0, 0, std::numbers::pi / 2, 1}, u);
  EXPECT_NEAR(n.x, 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(n.y, 0.1);
  EXPECT_DOUBLE_EQ(n.theta, std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(n.v, 1.0);
}

TEST(Unicycle, PositionUsesCurrentSpeed) {
  const UnicycleModel m;
  const auto u = in(0, -1);
  const auto n = m.step({0, 0, 0, 1}, u);
  EXPECT_DOUBLE_EQ(n.x, 0.1);
  EXPECT_DOUBLE_EQ(n.v, 0.9);
}

TEST(Unicycle, InputsAndSpeedAreClamped) {
  const UnicycleModel m;
  const auto u = in(10, 10);
  const auto n = m.step({0, 0, 0, 0.95}, u);
  EXPECT_DOUBLE_EQ(n.theta, 0.15);  // omega clamped to 1.5
  EXPECT_DOUBLE_EQ(n.v, 1.0);
  const auto back = in(-10, -10);
  EXPECT_DOUBLE_EQ(m.step({0, 0, 0, 0.05}, back).v, 0.0);
}

TEST(Unicycle, NonFiniteRejected) {
  const UnicycleModel m;
  const auto u = in(0, 0);
  EXPECT_THROW((void)m.step({NAN, 0, 0, 0}, u), std::invalid_argument);
  const auto bad = in(INFINITY, 0);
  EXPECT_THROW((void)m.step({0, 0, 0, 0}, bad), std::invalid_argument);
}

TEST(Vehicle, ConstantSpeed) {
  const IntersectionModel m(1, {});
  const auto n = m.step_vehicle({0, 10}, 0);
  EXPECT_DOUBLE_EQ(n.s, 1.0);
  EXPECT_DOUBLE_EQ(n.v, 10.0);
}

TEST(Vehicle, SpeedFloor) {
  const IntersectionModel m(1, {});
  const auto n = m.step_vehicle({0, 0}, -1.5);
  EXPECT_DOUBLE_EQ(n.s, 0.0);
  EXPECT_DOUBLE_EQ(n.v, 0.0);
}

TEST(Vehicle, DirectSubstitution) {
  const IntersectionModel m(1, {});
  const auto n = m.step_vehicle({5, 2}, 1.5);
  EXPECT_DOUBLE_EQ(n.s, 5.2);
  EXPECT_DOUBLE_EQ(n.v, 2.15);
  EXPECT_DOUBLE_EQ(m.step_vehicle({0, 9.99}, 1.5).v, 10.0);
  EXPECT_DOUBLE_EQ(m.step_vehicle({0, 5}, 7.0).v, 5.15);  // accel clamped to 1.5
  EXPECT_THROW((void)m.step_vehicle({0, 5}, NAN), std::invalid_argument);
}

TEST(Rollout, ZeroHorizonRejected) {
  const UnicycleModel m;
  EXPECT_THROW((void)rollout(m, UnicycleState{}, ControlSequence(0, 2)), std::invalid_argument);
}

TEST(Rollout, StationaryFixedPoint) {
  const UnicycleModel m;
  const UnicycleState s{0.3, -0.2, 1.0, 0.0};
  const auto traj = rollout(m, s, ControlSequence(15, 2));
  ASSERT_EQ(traj.states.size(), 16u);
  for (const auto& x : traj.states) EXPECT_EQ(x, s);
}

TEST(Rollout, HandIteratedEuler) {
  const UnicycleModel m;
  const auto traj = rollout(m, {0, 0, 0, 1}, ControlSequence(10, 2));
  // x_{k+1} = x_k + 1 * cos(0) * 0.1, ten times.
  double x = 0.0;
  for (int k = 0; k < 10; ++k) x += 0.1;
  EXPECT_EQ(traj.states.back().x, x);
  EXPECT_NEAR(traj.states.back().x, 1.0, 1e-12);
}

TEST(Rollout, ConsistencyClampingDeterminism) {
  const UnicycleModel m;
  RandomStream rng(StreamKey(5));
  for (int trial = 0; trial < 200; ++trial) {
    ControlSequence seq(20, 2);
    for (auto& v : seq.flat()) v = 3.0 * rng.normal();
    const UnicycleState start{rng.normal(), rng.normal(), rng.normal(), rng.uniform()};
    const auto a = rollout(m, start, seq);
    const auto b = rollout(m, start, seq);
    ASSERT_EQ(a.states.front(), start);
    for (std::size_t k = 0; k < 20; ++k) {
      ASSERT_EQ(m.step(a.states[k], seq.input(k)), a.states[k + 1]);
      ASSERT_EQ(a.states[k + 1], b.states[k + 1]);
      ASSERT_GE(a.states[k + 1].v, 0.0);
      ASSERT_LE(a.states[k + 1].v, 1.0);
    }
  }
}

TEST(Rollout, VehicleSpeedStaysInRange) {
  const IntersectionModel m(3, {});
  RandomStream rng(StreamKey(6));
  IntersectionState x;
  x.count = 3;
  for (auto& v : x.vehicles) v = {0.0, 10.0 * rng.uniform()};
  for (int k = 0; k < 500; ++k) {
    const std::array<double, 3> u{5 * rng.normal(), 5 * rng.normal(), 5 * rng.normal()};
    const auto n = m.step(x, u);
    for (std::size_t i = 0; i < 3; ++i) {
      ASSERT_GE(n.vehicles[i].v, 0.0);
      ASSERT_LE(n.vehicles[i].v, 10.0);
      ASSERT_GE(n.vehicles[i].s, x.vehicles[i].s);
    }
    x = n;
  }
}

TEST(Path, StraightEnds) {
  Path p(Pose2{{0, 0}, 0.0});
  p.line(10);
  const IntersectionScene scene{{p, p}, {4, 2}};
  const auto r0 = pose_of(0, 0.0, scene);
  EXPECT_DOUBLE_EQ(r0.center.x, 0.0);
  EXPECT_DOUBLE_EQ(r0.center.y, 0.0);
  EXPECT_DOUBLE_EQ(r0.heading, 0.0);
  EXPECT_DOUBLE_EQ(r0.length, 4.0);
  const auto r1 = pose_of(1, 10.0, scene);
  EXPECT_DOUBLE_EQ(r1.center.x, 10.0);
  EXPECT_DOUBLE_EQ(r1.center.y, 0.0);
  const auto r2 = pose_of(0, 12.5, scene);  // extrapolated
  EXPECT_DOUBLE_EQ(r2.center.x, 12.5);
  EXPECT_THROW((void)pose_of(2, 0.0, scene), std::invalid_argument);
}

TEST(Path, ArcGeometryMatchesAnalyticCircle) {
  Path p(Pose2{{0, 0}, 0.0});
  p.line(2).arc(3.0, std::numbers::pi / 2).line(2).arc(1.5, -std::numbers::pi / 3);
  // Left arc: center (2, 3), radius 3, from angle -pi/2 to 0.
  for (double local : {0.1, 1.0, 2.3, 4.5}) {
    const double s = 2.0 + local;
    const auto pose = p.pose_at(s);
    const double ang = -std::numbers::pi / 2 + local / 3.0;
    EXPECT_NEAR(pose.position.x, 2.0 + 3.0 * std::cos(ang), 1e-12);
    EXPECT_NEAR(pose.position.y, 3.0 + 3.0 * std::sin(ang), 1e-12);
    // heading equals the direction of the finite-difference tangent
    const double ds = 1e-6;
    const auto a = p.pose_at(s - ds).position;
    const auto b = p.pose_at(s + ds).position;
    EXPECT_NEAR(std::cos(pose.heading), (b.x - a.x) / (2 * ds), 1e-6);
    EXPECT_NEAR(std::sin(pose.heading), (b.y - a.y) / (2 * ds), 1e-6);
  }
  // Arc length is consistent with unit-speed motion everywhere.
  for (double s = 0.05; s < p.length(); s += 0.37) {
    const auto a = p.pose_at(s).position;
    const auto b = p.pose_at(s + 1e-5).position;
    EXPECT_NEAR(norm(b - a), 1e-5, 1e-9);
  }
}

TEST(CrossingPaths, TurnsEndOnTheRightLanes) {
  const IntersectionLayout layout{4.0, 50.0, 30.0};
  const double lw = 4.0;
  // South -> north, straight.
  auto straight = make_crossing_path(layout, Approach::south, Approach::north);
  EXPECT_NEAR(straight.end().position.x, 0.5 * lw, 1e-9);
  EXPECT_NEAR(straight.end().position.y, lw + 30.0, 1e-9);
  // South -> east, right turn onto the eastbound lane (y = -lw/2).
  auto right = make_crossing_path(layout, Approach::south, Approach::east);
  EXPECT_NEAR(right.end().position.y, -0.5 * lw, 1e-9);
  EXPECT_NEAR(right.end().position.x, lw + 30.0, 1e-9);
  EXPECT_NEAR(std::cos(right.end().heading), 1.0, 1e-9);
  // South -> west, left turn onto the westbound lane (y = +lw/2).
  auto left = make_crossing_path(layout, Approach::south, Approach::west);
  EXPECT_NEAR(left.end().position.y, 0.5 * lw, 1e-9);
  EXPECT_NEAR(left.end().position.x, -lw - 30.0, 1e-9);
  // East -> north is a right turn: ends heading +y on x = +lw/2.
  auto en = make_crossing_path(layout, Approach::east, Approach::north);
  EXPECT_NEAR(en.end().position.x, 0.5 * lw, 1e-9);
  EXPECT_NEAR(std::sin(en.end().heading), 1.0, 1e-9);
  // Lead-in moves the start back without changing the geometry downstream.
  auto delayed = make_crossing_path(layout, Approach::south, Approach::north, 12.0);
  EXPECT_NEAR(delayed.length(), straight.length() + 12.0, 1e-9);
  EXPECT_NEAR(delayed.pose_at(12.0).position.y, straight.pose_at(0.0).position.y, 1e-9);
  EXPECT_THROW((void)make_crossing_path(layout, Approach::west, Approach::west), std::invalid_argument);
}

}  // namespace
