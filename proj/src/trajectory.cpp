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

#include "sikm/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sikm {

namespace {

// max |s'(u)| at u = 1/2 and max |s''(u)| at u = (3 -+ sqrt 3) / 6.
constexpr double kSmoothstepMaxDs = 15.0 / 8.0;
const double kSmoothstepMaxDds = 10.0 / std::sqrt(3.0);

void require_dim(const Vec& v, int n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << "trajectory: " << what << " has length " << v.size() << ", expected "
       << n;
    throw InvalidTrajectory(os.str());
  }
  if (!v.allFinite()) {
    throw InvalidTrajectory(std::string("trajectory: ") + what + " not finite");
  }
}

}  // namespace

Smoothstep smoothstep(double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return {u3 * (10.0 - 15.0 * u + 6.0 * u2),
          30.0 * u2 * (1.0 - 2.0 * u + u2),
          60.0 * u * (1.0 - 3.0 * u + 2.0 * u2)};
}

ReferenceTrajectory make_trajectory(const TrajectoryFamily& spec, int sys_dim) {
  if (sys_dim <= 0) throw InvalidTrajectory("trajectory: zero dimension");
  if (!(spec.duration >= 0.0) || !std::isfinite(spec.duration)) {
    throw InvalidTrajectory("trajectory: negative or non-finite duration");
  }
  ReferenceTrajectory traj;
  traj.family_ = spec;
  traj.dim_ = sys_dim;

  if (const auto* c = std::get_if<ConstantSpec>(&spec.shape)) {
    require_dim(c->value, sys_dim, "value");
  } else if (const auto* s = std::get_if<SinusoidalSpec>(&spec.shape)) {
    require_dim(s->offset, sys_dim, "offset");
    require_dim(s->amplitude, sys_dim, "amplitude");
    require_dim(s->omega, sys_dim, "omega");
    require_dim(s->phase, sys_dim, "phase");
    const Vec aw = s->amplitude.cwiseProduct(s->omega);
    const Vec aw2 = aw.cwiseProduct(s->omega);
    traj.v_max_ = aw.norm();
    traj.a_max_ = aw2.norm();
  } else {
    const auto& w = std::get<WaypointSpec>(spec.shape);
    if (w.waypoints.size() < 2) {
      throw InvalidTrajectory("trajectory: need at least two waypoints");
    }
    if (w.segment_durations.size() + 1 != w.waypoints.size()) {
      throw InvalidTrajectory("trajectory: need one duration per segment");
    }
    double t = 0.0;
    for (size_t i = 0; i < w.segment_durations.size(); ++i) {
      const double d = w.segment_durations[i];
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw InvalidTrajectory("trajectory: segment durations must be positive");
      }
      require_dim(w.waypoints[i], sys_dim, "waypoint");
      require_dim(w.waypoints[i + 1], sys_dim, "waypoint");
      traj.segment_start_.push_back(t);
      t += d;
      // Each segment moves along a fixed direction, so the norms of the
      // derivatives are |delta| s'(u) / d and |delta| s''(u) / d^2.
      const double delta = (w.waypoints[i + 1] - w.waypoints[i]).norm();
      traj.v_max_ = std::max(traj.v_max_, delta * kSmoothstepMaxDs / d);
      traj.a_max_ = std::max(traj.a_max_, delta * kSmoothstepMaxDds / (d * d));
    }
    if (std::abs(t - spec.duration) > 1e-9 * std::max(1.0, t)) {
      throw InvalidTrajectory("trajectory: duration must equal the sum of segment durations");
    }
  }
  return traj;
}

TrajectorySample ReferenceTrajectory::sample(double t) const {
  if (!(t >= 0.0 && t <= family_.duration)) {
    std::ostringstream os;
    os << "trajectory: t = " << t << " outside [0, " << family_.duration << "]";
    throw std::out_of_range(os.str());
  }
  TrajectorySample out;
  if (const auto* c = std::get_if<ConstantSpec>(&family_.shape)) {
    out.q = c->value;
    out.qd = Vec::Zero(dim_);
    out.qdd = Vec::Zero(dim_);
  } else if (const auto* s = std::get_if<SinusoidalSpec>(&family_.shape)) {
    out.q.resize(dim_);
    out.qd.resize(dim_);
    out.qdd.resize(dim_);
    for (int j = 0; j < dim_; ++j) {
      const double arg = s->omega[j] * t + s->phase[j];
      const double a = s->amplitude[j];
      const double w = s->omega[j];
      out.q[j] = s->offset[j] + a * std::sin(arg);
      out.qd[j] = a * w * std::cos(arg);
      out.qdd[j] = -a * w * w * std::sin(arg);
    }
  } else {
    const auto& w = std::get<WaypointSpec>(family_.shape);
    auto it = std::upper_bound(segment_start_.begin(), segment_start_.end(), t);
    const size_t seg = static_cast<size_t>(std::max<std::ptrdiff_t>(
        0, std::distance(segment_start_.begin(), it) - 1));
    const double d = w.segment_durations[seg];
    const double u = std::clamp((t - segment_start_[seg]) / d, 0.0, 1.0);
    const Smoothstep ss = smoothstep(u);
    const Vec delta = w.waypoints[seg + 1] - w.waypoints[seg];
    out.q = w.waypoints[seg] + ss.s * delta;
    out.qd = (ss.ds / d) * delta;
    out.qdd = (ss.dds / (d * d)) * delta;
  }
  return out;
}

TrajectoryFamily planar_stress_preset(double duration, double speed_scale) {
  SinusoidalSpec s;
  s.offset = (Vec(6) << 0.0, 0.0, 0.0, 1.0, 1.0, 1.0).finished();
  s.amplitude = (Vec(6) << 0.4, 0.0, 0.3, 0.2, 0.15, 0.25).finished();
  s.omega = speed_scale * (Vec(6) << 0.3, 0.0, 0.25, 0.4, 0.35, 0.3).finished();
  s.phase = (Vec(6) << 0.0, 0.0, 0.5, 1.0, 2.0, 3.0).finished();
  return {duration, s};
}

}  // namespace sikm
