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

#include "sikm/error_flow.hpp"

#include <algorithm>

namespace sikm {

double clamp_time(const ReferenceTrajectory& traj, double t) {
  const double slack = 1e-9 * std::max(1.0, traj.duration());
  if (t < 0.0 && t > -slack) return 0.0;
  if (t > traj.duration() && t < traj.duration() + slack) {
    return traj.duration();
  }
  return t;
}

IntervalFlow::IntervalFlow(const SquareSystem& sys,
                           const ReferenceTrajectory& traj, StrategyKind kind,
                           const SampledState& state, double k,
                           const ConditioningGuard& guard)
    : sys_(sys), traj_(traj), kind_(kind), state_(state), guard_(guard) {
  const Mat a = sys.eval_jacobian(state.q_h);
  require_invertible(a, state.q_h, guard);
  if (kind == StrategyKind::kSikmD && sys.block_structure() != nullptr) {
    feedback_ = -k * stacked_product(sys, state.q_h, state.error());
  } else {
    feedback_ = -k * (a * state.error());
  }
  if (kind == StrategyKind::kFF) a_h_ = a;
}

Vec IntervalFlow::command(double t) const {
  return command_at(traj_.sample(clamp_time(traj_, t)));
}

Vec IntervalFlow::command_at(const TrajectorySample& r) const {
  switch (kind_) {
    case StrategyKind::kPS:
      return feedback_;
    case StrategyKind::kFF:
      return feedback_ + a_h_ * r.qd;
    case StrategyKind::kSikmC:
      return feedback_ + sys_.eval_jacobian(r.q) * r.qd;
    case StrategyKind::kSikmD:
      if (sys_.block_structure() != nullptr) {
        return feedback_ + stacked_product(sys_, r.q, r.qd);
      }
      return feedback_ + sys_.eval_jacobian(r.q) * r.qd;
  }
  return feedback_;
}

Vec IntervalFlow::rate(double t, const Vec& e) const {
  const TrajectorySample r = traj_.sample(clamp_time(traj_, t));
  const Vec q = r.q + e;
  return solve_with_guard(sys_.eval_jacobian(q), q, command_at(r), guard_) -
         r.qd;
}

Vec rk4_step(const IntervalFlow& flow, double t, const Vec& e, double dt) {
  const Vec k1 = flow.rate(t, e);
  const Vec k2 = flow.rate(t + 0.5 * dt, e + 0.5 * dt * k1);
  const Vec k3 = flow.rate(t + 0.5 * dt, e + 0.5 * dt * k2);
  const Vec k4 = flow.rate(t + dt, e + dt * k3);
  return e + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec propagate(const IntervalFlow& flow, double t0, const Vec& e0,
              double duration, int steps) {
  const double dt = duration / steps;
  Vec e = e0;
  for (int i = 0; i < steps; ++i) e = rk4_step(flow, t0 + i * dt, e, dt);
  return e;
}

}  // namespace sikm
