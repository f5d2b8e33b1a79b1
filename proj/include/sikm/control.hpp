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

// Sampled inverse-kinematic tracking controllers.
//
// Every strategy applies a feedback term frozen at the last sampling instant
// hT,
//
//   u_k = -k A_{q_h} (q_h - q^r_h),
//
// plus a feedforward term that differs per strategy:
//
//   PS      none
//   FF      A_{q_h} qd^r(t)        (Jacobian frozen at the sample)
//   SIKM-C  A_{q^r(t)} qd^r(t)     (Jacobian evaluated on the reference)
//   SIKM-D  same as SIKM-C, evaluated robot by robot from local data
//
// PS, FF and SIKM-C pick their gain online at every sample; SIKM-D uses an
// offline gain.

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "sikm/kernels.hpp"
#include "sikm/kinematics.hpp"
#include "sikm/trajectory.hpp"

namespace sikm {

enum class StrategyKind { kPS, kFF, kSikmC, kSikmD };

std::string_view to_string(StrategyKind kind);
// Accepts "PS", "FF", "SIKM-C", "SIKM-D".
std::optional<StrategyKind> parse_strategy_kind(std::string_view name);

struct GainSearch {
  double k_min = 0.0;
  // Upper end of the bracket; 2/T when unset.
  std::optional<double> k_max;
  int grid_points = 64;
  int refine_iters = 40;
  // RK4 steps used to predict e(hT + T) for one candidate gain.
  int prediction_steps = 50;
};

enum class OnlineMode {
  kErrorFlow,  // minimize the predicted ||e(hT + T)|| over k
  kAuxiliary,  // k_h = tau_o(q_h) / T from the point-stabilization flow
};

struct OfflineGain {
  double k = 1.0;
};

struct OnlineGain {
  GainSearch search;
  OnlineMode mode = OnlineMode::kErrorFlow;
  double aux_horizon = 4.0;
  double aux_dt = 1e-3;
};

struct ControlStrategy {
  StrategyKind kind = StrategyKind::kSikmD;
  std::variant<OfflineGain, OnlineGain> gain = OfflineGain{};
  double T = 1.0;

  // Online gain for PS, FF and SIKM-C; `offline_k` for SIKM-D.
  static ControlStrategy with_default_gain(StrategyKind kind, double T,
                                           double offline_k);
  void validate() const;
  bool is_online() const { return std::holds_alternative<OnlineGain>(gain); }
};

// Quantities held constant over [hT, (h+1)T).
struct SampledState {
  double t_h = 0.0;
  Vec q_h;    // measured configuration at hT
  Vec qr_h;   // reference at hT
  Vec qrd_h;  // reference rate at hT
  double k_h = 0.0;

  Vec error() const { return q_h - qr_h; }
};

SampledState make_sampled_state(const ReferenceTrajectory& traj, double t_h,
                                const Vec& measured_q, double k);

// -k A_{q_h} (q_h - q^r_h).
Vec sampled_feedback(const SquareSystem& sys, const SampledState& state,
                     double k, const ConditioningGuard& guard = {});

// Strategy feedforward at time t (zero for PS).
Vec feedforward(StrategyKind kind, const SquareSystem& sys,
                const SampledState& state, const ReferenceTrajectory& traj,
                double t, const ConditioningGuard& guard = {});

Vec u_ps(const SquareSystem& sys, const SampledState& state, double k,
         const ConditioningGuard& guard = {});
Vec u_ff_naive(const SquareSystem& sys, const SampledState& state,
               const ReferenceTrajectory& traj, double t, double k,
               const ConditioningGuard& guard = {});
Vec u_sikm(const SquareSystem& sys, const SampledState& state,
           const ReferenceTrajectory& traj, double t, double k,
           const ConditioningGuard& guard = {});

// Rows of robot `robot` of the SIKM command, computed from that robot's own
// coordinates, the pivot coordinates, and their references only.
// No robot sees the full Jacobian, so no invertibility check is made here.
Vec u_sikm_distributed(const SquareSystem& sys, int robot,
                       const SampledState& state,
                       const ReferenceTrajectory& traj, double t, double k);

// Per-robot SIKM commands scattered back into a full task vector.
Vec u_sikm_stacked(const SquareSystem& sys, const SampledState& state,
                   const ReferenceTrajectory& traj, double t, double k);

// A_q v assembled robot by robot from local Jacobians.
Vec stacked_product(const SquareSystem& sys, const Vec& q, const Vec& v);

// Full command of a strategy at time t with gain k.
Vec control_output(StrategyKind kind, const SquareSystem& sys,
                   const SampledState& state, const ReferenceTrajectory& traj,
                   double t, double k, const ConditioningGuard& guard = {});

class InfeasibleStep : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GainChoice {
  double k = 0.0;
  double objective = 0.0;  // predicted ||e(hT + T)||
};

// Predicted ||e(hT + T)|| when the strategy runs the interval with gain k.
// Returns nullopt when the prediction hits a singular configuration.
std::optional<double> predicted_error_norm(StrategyKind kind,
                                           const SquareSystem& sys,
                                           const ReferenceTrajectory& traj,
                                           const SampledState& state, double T,
                                           double k, int steps,
                                           const ConditioningGuard& guard = {});

// Coarse grid over [k_min, k_max] followed by golden-section refinement
// around the best grid point. Ties go to the smallest gain.
GainChoice online_gain(StrategyKind kind, const SquareSystem& sys,
                       const ReferenceTrajectory& traj,
                       const SampledState& state, double T,
                       const GainSearch& search,
                       Execution exec = Execution::kParallel,
                       const ConditioningGuard& guard = {});

struct AuxiliaryGain {
  double k = 0.0;
  double tau_s = 0.0;  // +inf when the error never returns to its start value
  double tau_o = 0.0;
};

// Integrates q' = -A_{q'}^{-1} A_{q_h} (q_h - q^r), q'(0) = q_h, and returns
// k_h = tau_o / T where tau_o minimizes ||q'(tau) - q^r|| on [0, tau_s].
AuxiliaryGain auxiliary_gain(const SquareSystem& sys, const Vec& q_h,
                             const Vec& q_ref, double T, double horizon,
                             double dt, const ConditioningGuard& guard = {});

// Minimizes f on [a, b] by golden-section search.
double golden_section_minimize(const std::function<double(double)>& f, double a,
                               double b, int iterations);

}  // namespace sikm
