// Copyright 2026 The SIKM Authors.
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


#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sikm/trajectory.hpp"
#include "test_support.hpp"

namespace sikm {
namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ReferenceTrajectory single_sinusoid(double amp, double omega) {
  SinusoidalSpec s{vec2(0.0, 1.0), vec2(amp, 0.0), vec2(omega, 0.0), vec2(0.0, 0.0)};
  return make_trajectory({10.0, s}, 2);
}

ReferenceTrajectory two_segment_waypoints() {
  WaypointSpec w{{vec2(0.0, 0.0), vec2(1.0, -0.5), vec2(1.5, 0.5)}, {2.0, 3.0}};
  return make_trajectory({5.0, w}, 2);
}

// Dense check of the velocity and acceleration bounds and of the derivative
// columns against finite differences.
void check_assumption_bounds(const ReferenceTrajectory& traj) {
  const int n = 10000;
  const double h = 1e-5;
  for (int i = 0; i <= n; ++i) {
    const double t = traj.duration() * i / n;
    const TrajectorySample s = traj.sample(t);
    EXPECT_LE(s.qd.norm(), traj.v_max() + 1e-9);
    EXPECT_LE(s.qdd.norm(), traj.a_max() + 1e-9);
    if (t - h < 0.0 || t + h > traj.duration()) continue;
    const TrajectorySample p = traj.sample(t + h);
    const TrajectorySample m = traj.sample(t - h);
    EXPECT_LT(((p.q - m.q) / (2 * h) - s.qd).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_LT(((p.qd - m.qd) / (2 * h) - s.qdd).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Trajectory, ConstantHasZeroDerivatives) {
  const ReferenceTrajectory traj = make_trajectory({4.0, ConstantSpec{vec2(1.0, 2.0)}}, 2);
  EXPECT_TRUE(traj.is_constant());
  EXPECT_EQ(traj.v_max(), 0.0);
  EXPECT_EQ(traj.a_max(), 0.0);
  for (double t : {0.0, 1.3, 4.0}) {
    const TrajectorySample s = traj.sample(t);
    EXPECT_EQ(s.q, vec2(1.0, 2.0));
    EXPECT_EQ(s.qd.norm(), 0.0);
    EXPECT_EQ(s.qdd.norm(), 0.0);
  }
}

TEST(Trajectory, SinusoidBoundsAreAnalytic) {
  const ReferenceTrajectory traj = single_sinusoid(0.7, 1.3);
  EXPECT_DOUBLE_EQ(traj.v_max(), 0.7 * 1.3);
  EXPECT_DOUBLE_EQ(traj.a_max(), 0.7 * 1.3 * 1.3);
  check_assumption_bounds(traj);
}

TEST(Trajectory, SinusoidQuarterPeriodReachesAmplitude) {
  const ReferenceTrajectory traj = single_sinusoid(0.7, 1.3);
  const TrajectorySample s = traj.sample(std::numbers::pi / (2 * 1.3));
  EXPECT_NEAR(s.q[0], 0.7, 1e-14);
  EXPECT_NEAR(s.qd[0], 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(s.q[1], 1.0);
}

TEST(Trajectory, WaypointsStartAndStopAtRest) {
  const ReferenceTrajectory traj = two_segment_waypoints();
  const TrajectorySample a = traj.sample(0.0);
  EXPECT_EQ(a.q, vec2(0.0, 0.0));
  EXPECT_EQ(a.qd.norm(), 0.0);
  EXPECT_EQ(a.qdd.norm(), 0.0);
  const TrajectorySample mid = traj.sample(2.0);
  EXPECT_NEAR((mid.q - vec2(1.0, -0.5)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(mid.qd.norm(), 0.0, 1e-15);
  const TrajectorySample end = traj.sample(5.0);
  EXPECT_NEAR((end.q - vec2(1.5, 0.5)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(end.qd.norm(), 0.0, 1e-15);
  EXPECT_NEAR(end.qdd.norm(), 0.0, 1e-15);
  check_assumption_bounds(traj);
}

TEST(Trajectory, SmoothstepIsQuintic) {
  for (double u : {0.0, 0.25, 0.5, 0.8, 1.0}) {
    const Smoothstep s = smoothstep(u);
    EXPECT_NEAR(s.s, u * u * u * (10 - 15 * u + 6 * u * u), 1e-15);
    EXPECT_NEAR(s.ds, 30 * u * u * (1 - u) * (1 - u), 1e-14);
  }
  EXPECT_EQ(smoothstep(0.0).dds, 0.0);
  EXPECT_EQ(smoothstep(1.0).dds, 0.0);
}

TEST(Trajectory, PresetsSatisfyBounds) {
  check_assumption_bounds(make_trajectory(planar_stress_preset(30.0), 6));
  check_assumption_bounds(make_trajectory(testing::planar_circle(20.0), 6));
  check_assumption_bounds(make_trajectory(testing::planar_wave(20.0), 6));
}

TEST(Trajectory, CircleSpeedIsBoundedAwayFromZero) {
  const ReferenceTrajectory traj = make_trajectory(testing::planar_circle(20.0), 6);
  for (int i = 0; i <= 2000; ++i) {
    EXPECT_NEAR(traj.sample(0.01 * i).qd.norm(), 0.15, 1e-12);
  }
}

TEST(Trajectory, SamplingIsDeterministic) {
  const ReferenceTrajectory traj = make_trajectory(planar_stress_preset(30.0), 6);
  const TrajectorySample a = traj.sample(12.345);
  const TrajectorySample b = traj.sample(12.345);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.qd, b.qd);
  EXPECT_EQ(a.qdd, b.qdd);
}

TEST(Trajectory, OutOfRangeTimeThrows) {
  const ReferenceTrajectory traj = single_sinusoid(1.0, 1.0);
  EXPECT_THROW(traj.sample(-0.1), std::out_of_range);
  EXPECT_THROW(traj.sample(10.1), std::out_of_range);
}

TEST(Trajectory, InvalidSpecsAreRejected) {
  EXPECT_THROW(make_trajectory({-1.0, ConstantSpec{vec2(0, 0)}}, 2), InvalidTrajectory);
  EXPECT_THROW(make_trajectory({1.0, ConstantSpec{vec2(0, 0)}}, 0), InvalidTrajectory);
  EXPECT_THROW(make_trajectory({1.0, ConstantSpec{vec2(0, 0)}}, 3), InvalidTrajectory);
  WaypointSpec one{{vec2(0, 0)}, {}};
  EXPECT_THROW(make_trajectory({1.0, one}, 2), InvalidTrajectory);
  WaypointSpec mismatch{{vec2(0, 0), vec2(1, 1)}, {2.0}};
  EXPECT_THROW(make_trajectory({3.0, mismatch}, 2), InvalidTrajectory);
  SinusoidalSpec nan{vec2(0, 0), vec2(NAN, 0), vec2(1, 1), vec2(0, 0)};
  EXPECT_THROW(make_trajectory({1.0, nan}, 2), InvalidTrajectory);
}

}  // namespace
}  // namespace sikm
