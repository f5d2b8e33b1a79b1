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

// Closed-loop tracking error flow inside one sampling interval:
//
//   e_dot(t) = A_{q(t)}^{-1} u(t) - qd^r(t),   q(t) = q^r(t) + e(t),
//
// with u(t) = u_k(hT) + u_ff(t). Integrating e rather than q keeps the
// reference an exact fixed point of the discrete flow whenever the strategy
// makes it one.

#pragma once

#include "sikm/control.hpp"

namespace sikm {

// Clamps t into [0, duration] when it overshoots by rounding only.
double clamp_time(const ReferenceTrajectory& traj, double t);

class IntervalFlow {
 public:
  IntervalFlow(const SquareSystem& sys, const ReferenceTrajectory& traj,
               StrategyKind kind, const SampledState& state, double k,
               const ConditioningGuard& guard = {});

  // Task-space command u(t).
  Vec command(double t) const;
  // de/dt at (t, e); throws SingularConfiguration.
  Vec rate(double t, const Vec& e) const;

  const Vec& feedback() const { return feedback_; }

 private:
  Vec command_at(const TrajectorySample& r) const;

  const SquareSystem& sys_;
  const ReferenceTrajectory& traj_;
  StrategyKind kind_;
  const SampledState& state_;
  ConditioningGuard guard_;
  Vec feedback_;
  Mat a_h_;  // A_{q_h}, kept for the FF feedforward
};

// One classical fourth-order Runge-Kutta step.
Vec rk4_step(const IntervalFlow& flow, double t, const Vec& e, double dt);

// e(t0 + duration) from e(t0) with `steps` equal RK4 steps.
Vec propagate(const IntervalFlow& flow, double t0, const Vec& e0,
              double duration, int steps);

}  // namespace sikm
