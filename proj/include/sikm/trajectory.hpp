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

#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

#include "sikm/kinematics.hpp"

namespace sikm {

class InvalidTrajectory : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConstantSpec {
  Vec value;
};

// q_j(t) = offset_j + amplitude_j * sin(omega_j * t + phase_j).
struct SinusoidalSpec {
  Vec offset;
  Vec amplitude;
  Vec omega;
  Vec phase;
};

// Quintic smoothstep between consecutive waypoints; zero velocity and
// acceleration at every waypoint.
struct WaypointSpec {
  std::vector<Vec> waypoints;
  std::vector<double> segment_durations;
};

struct TrajectoryFamily {
  double duration = 0.0;
  std::variant<ConstantSpec, SinusoidalSpec, WaypointSpec> shape;
};

struct TrajectorySample {
  Vec q;
  Vec qd;
  Vec qdd;
};

class ReferenceTrajectory {
 public:
  int dim() const { return dim_; }
  double duration() const { return family_.duration; }
  double v_max() const { return v_max_; }
  double a_max() const { return a_max_; }
  bool is_constant() const {
    return std::holds_alternative<ConstantSpec>(family_.shape);
  }
  const TrajectoryFamily& family() const { return family_; }

  // Throws std::out_of_range outside [0, duration].
  TrajectorySample sample(double t) const;

 private:
  friend ReferenceTrajectory make_trajectory(const TrajectoryFamily&, int);

  TrajectoryFamily family_;
  int dim_ = 0;
  std::vector<double> segment_start_;
  double v_max_ = 0.0;
  double a_max_ = 0.0;
};

ReferenceTrajectory make_trajectory(const TrajectoryFamily& spec, int sys_dim);

// Quintic smoothstep s(u) = 10u^3 - 15u^4 + 6u^5 and its first two
// derivatives with respect to u.
struct Smoothstep {
  double s, ds, dds;
};
Smoothstep smoothstep(double u);

// Sinusoid exercising every planar-formation coordinate except y_V.
TrajectoryFamily planar_stress_preset(double duration, double speed_scale = 1.0);

}  // namespace sikm
