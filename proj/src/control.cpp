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

#include "sikm/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "sikm/error_flow.hpp"

namespace sikm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-9;

const BlockStructure& require_blocks(const SquareSystem& sys) {
  const BlockStructure* blocks = sys.block_structure();
  if (blocks == nullptr) {
    throw std::invalid_argument(sys.id() +
                                ": distributed SIKM needs a block structure");
  }
  return *blocks;
}

// Rows of robot i of A_q v, from robot i's local data only.
Vec robot_product(const SquareSystem& sys, const BlockStructure& blocks,
                  int robot, const Vec& q, const Vec& v) {
  return sys.local_jacobian(robot, blocks.gather(robot, q)) *
         blocks.gather(robot, v);
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kPS:
      return "PS";
    case StrategyKind::kFF:
      return "FF";
    case StrategyKind::kSikmC:
      return "SIKM-C";
    case StrategyKind::kSikmD:
      return "SIKM-D";
  }
  return "?";
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view name) {
  for (StrategyKind k : {StrategyKind::kPS, StrategyKind::kFF,
                         StrategyKind::kSikmC, StrategyKind::kSikmD}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

ControlStrategy ControlStrategy::with_default_gain(StrategyKind kind, double T,
                                                   double offline_k) {
  ControlStrategy s;
  s.kind = kind;
  s.T = T;
  if (kind == StrategyKind::kSikmD) {
    s.gain = OfflineGain{offline_k};
  } else {
    s.gain = OnlineGain{};
  }
  return s;
}

void ControlStrategy::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw std::invalid_argument("strategy: sampling period must be positive");
  }
  if (const auto* off = std::get_if<OfflineGain>(&gain)) {
    if (!(off->k > 0.0) || !std::isfinite(off->k)) {
      throw std::invalid_argument("strategy: offline gain must be positive");
    }
    return;
  }
  const auto& on = std::get<OnlineGain>(gain);
  const GainSearch& s = on.search;
  if (!(s.k_min >= 0.0)) {
    throw std::invalid_argument("strategy: k_min must be nonnegative");
  }
  if (s.k_max && !(*s.k_max > s.k_min)) {
    throw std::invalid_argument("strategy: k_max must exceed k_min");
  }
  if (!s.k_max && !(2.0 / T > s.k_min)) {
    throw std::invalid_argument("strategy: k_min must be below 2/T");
  }
  if (s.grid_points < 2 || s.refine_iters < 0 || s.prediction_steps < 1) {
    throw std::invalid_argument("strategy: invalid gain search settings");
  }
  if (on.mode == OnlineMode::kAuxiliary &&
      !(on.aux_horizon > 0.0 && on.aux_dt > 0.0 && on.aux_dt <= on.aux_horizon)) {
    throw std::invalid_argument("strategy: invalid auxiliary flow settings");
  }
}

SampledState make_sampled_state(const ReferenceTrajectory& traj, double t_h,
                                const Vec& measured_q, double k) {
  const TrajectorySample r = traj.sample(clamp_time(traj, t_h));
  if (measured_q.size() != r.q.size()) {
    throw DimensionError("sampled state: configuration size mismatch");
  }
  return SampledState{t_h, measured_q, r.q, r.qd, k};
}

Vec sampled_feedback(const SquareSystem& sys, const SampledState& state,
                     double k, const ConditioningGuard& guard) {
  const Mat a = sys.eval_jacobian(state.q_h);
  require_invertible(a, state.q_h, guard);
  return -k * (a * state.error());
}

Vec feedforward(StrategyKind kind, const SquareSystem& sys,
                const SampledState& state, const ReferenceTrajectory& traj,
                double t, const ConditioningGuard& guard) {
  switch (kind) {
    case StrategyKind::kPS:
      return Vec::Zero(sys.dim());
    case StrategyKind::kFF: {
      const TrajectorySample r = traj.sample(clamp_time(traj, t));
      return sys.eval_jacobian(state.q_h) * r.qd;
    }
    case StrategyKind::kSikmC: {
      const TrajectorySample r = traj.sample(clamp_time(traj, t));
      const Mat a = sys.eval_jacobian(r.q);
      require_invertible(a, r.q, guard);
      return a * r.qd;
    }
    case StrategyKind::kSikmD: {
      const TrajectorySample r = traj.sample(clamp_time(traj, t));
      if (sys.block_structure() != nullptr) {
        return stacked_product(sys, r.q, r.qd);
      }
      const Mat a = sys.eval_jacobian(r.q);
      require_invertible(a, r.q, guard);
      return a * r.qd;
    }
  }
  throw std::logic_error("feedforward: unknown strategy");
}

Vec u_ps(const SquareSystem& sys, const SampledState& state, double k,
         const ConditioningGuard& guard) {
  return sampled_feedback(sys, state, k, guard);
}

Vec u_ff_naive(const SquareSystem& sys, const SampledState& state,
               const ReferenceTrajectory& traj, double t, double k,
               const ConditioningGuard& guard) {
  return sampled_feedback(sys, state, k, guard) +
         feedforward(StrategyKind::kFF, sys, state, traj, t, guard);
}

Vec u_sikm(const SquareSystem& sys, const SampledState& state,
           const ReferenceTrajectory& traj, double t, double k,
           const ConditioningGuard& guard) {
  return sampled_feedback(sys, state, k, guard) +
         feedforward(StrategyKind::kSikmC, sys, state, traj, t, guard);
}

Vec stacked_product(const SquareSystem& sys, const Vec& q, const Vec& v) {
  const BlockStructure& blocks = require_blocks(sys);
  Vec out = Vec::Zero(sys.dim());
  for (int i = 0; i < blocks.num_robots(); ++i) {
    const Vec part = robot_product(sys, blocks, i, q, v);
    const auto& rows = blocks.robots[i].rows;
    for (size_t r = 0; r < rows.size(); ++r) out[rows[r]] = part[r];
  }
  return out;
}

Vec u_sikm_distributed(const SquareSystem& sys, int robot,
                       const SampledState& state,
                       const ReferenceTrajectory& traj, double t, double k) {
  const BlockStructure& blocks = require_blocks(sys);
  if (robot < 0 || robot >= blocks.num_robots()) {
    throw std::out_of_range("u_sikm_distributed: robot index out of range");
  }
  const TrajectorySample r = traj.sample(clamp_time(traj, t));
  const Vec feedback =
      -k * robot_product(sys, blocks, robot, state.q_h, state.error());
  return feedback + robot_product(sys, blocks, robot, r.q, r.qd);
}

Vec u_sikm_stacked(const SquareSystem& sys, const SampledState& state,
                   const ReferenceTrajectory& traj, double t, double k) {
  const BlockStructure& blocks = require_blocks(sys);
  Vec out = Vec::Zero(sys.dim());
  for (int i = 0; i < blocks.num_robots(); ++i) {
    const Vec part = u_sikm_distributed(sys, i, state, traj, t, k);
    const auto& rows = blocks.robots[i].rows;
    for (size_t r = 0; r < rows.size(); ++r) out[rows[r]] = part[r];
  }
  return out;
}

Vec control_output(StrategyKind kind, const SquareSystem& sys,
                   const SampledState& state, const ReferenceTrajectory& traj,
                   double t, double k, const ConditioningGuard& guard) {
  switch (kind) {
    case StrategyKind::kPS:
      return u_ps(sys, state, k, guard);
    case StrategyKind::kFF:
      return u_ff_naive(sys, state, traj, t, k, guard);
    case StrategyKind::kSikmC:
      return u_sikm(sys, state, traj, t, k, guard);
    case StrategyKind::kSikmD:
      if (sys.block_structure() != nullptr) {
        return u_sikm_stacked(sys, state, traj, t, k);
      }
      return u_sikm(sys, state, traj, t, k, guard);
  }
  throw std::logic_error("control_output: unknown strategy");
}

std::optional<double> predicted_error_norm(StrategyKind kind,
                                           const SquareSystem& sys,
                                           const ReferenceTrajectory& traj,
                                           const SampledState& state, double T,
                                           double k, int steps,
                                           const ConditioningGuard& guard) {
  try {
    const IntervalFlow flow(sys, traj, kind, state, k, guard);
    const Vec e = propagate(flow, state.t_h, state.error(), T, steps);
    const double n = e.norm();
    if (!std::isfinite(n)) return std::nullopt;
    return n;
  } catch (const SingularConfiguration&) {
    return std::nullopt;
  }
}

GainChoice online_gain(StrategyKind kind, const SquareSystem& sys,
                       const ReferenceTrajectory& traj,
                       const SampledState& state, double T,
                       const GainSearch& search, Execution exec,
                       const ConditioningGuard& guard) {
  const double k_lo = search.k_min;
  const double k_hi = search.k_max.value_or(2.0 / T);
  const int n = search.grid_points;
  if (!(k_hi > k_lo) || n < 2) {
    throw std::invalid_argument("online_gain: empty search bracket");
  }
  const double step = (k_hi - k_lo) / (n - 1);
  auto objective = [&](double k) {
    return predicted_error_norm(kind, sys, traj, state, T, k,
                                search.prediction_steps, guard)
        .value_or(kInf);
  };

  std::vector<double> ks(n), fs(n);
  for (int j = 0; j < n; ++j) ks[j] = j + 1 == n ? k_hi : k_lo + j * step;
  for_each_index(static_cast<std::size_t>(n), exec,
                 [&](std::size_t j) { fs[j] = objective(ks[j]); });

  const auto best_it = std::min_element(fs.begin(), fs.end());
  if (!std::isfinite(*best_it)) {
    std::ostringstream os;
    os << "online_gain: every candidate gain hits a singular configuration at t = "
       << state.t_h;
    throw InfeasibleStep(os.str());
  }
  const int j = static_cast<int>(best_it - fs.begin());

  std::vector<std::pair<double, double>> candidates;
  for (int i = 0; i < n; ++i) candidates.emplace_back(ks[i], fs[i]);
  if (search.refine_iters > 0) {
    const double a = ks[std::max(j - 1, 0)];
    const double b = ks[std::min(j + 1, n - 1)];
    const double k_ref =
        golden_section_minimize(objective, a, b, search.refine_iters);
    candidates.emplace_back(k_ref, objective(k_ref));
  }

  double f_min = kInf;
  for (const auto& c : candidates) f_min = std::min(f_min, c.second);
  GainChoice choice{kInf, f_min};
  for (const auto& c : candidates) {
    if (c.second <= f_min + kTieTolerance && c.first < choice.k) {
      choice = GainChoice{c.first, c.second};
    }
  }
  return choice;
}

double golden_section_minimize(const std::function<double(double)>& f, double a,
                               double b, int iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

AuxiliaryGain auxiliary_gain(const SquareSystem& sys, const Vec& q_h,
                             const Vec& q_ref, double T, double horizon,
                             double dt, const ConditioningGuard& guard) {
  if (!(T > 0.0) || !(horizon > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("auxiliary_gain: T, horizon, dt must be positive");
  }
  if (q_h.size() != sys.dim() || q_ref.size() != sys.dim()) {
    throw DimensionError("auxiliary_gain: configuration size mismatch");
  }
  const double n0 = (q_h - q_ref).norm();
  if (n0 == 0.0) return AuxiliaryGain{0.0, 0.0, 0.0};

  const Vec drive = sys.eval_jacobian(q_h) * (q_h - q_ref);
  auto rate = [&](const Vec& q) {
    return Vec(-solve_jacobian(sys, q, drive, guard));
  };

  const int steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> norms{n0};
  Vec q = q_h;
  double tau_s = kInf;
  for (int i = 1; i <= steps; ++i) {
    const Vec k1 = rate(q);
    const Vec k2 = rate(q + 0.5 * dt * k1);
    const Vec k3 = rate(q + 0.5 * dt * k2);
    const Vec k4 = rate(q + dt * k3);
    q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double n = (q - q_ref).norm();
    norms.push_back(n);
    if (n >= n0) {
      const double prev = norms[i - 1];
      const double frac = n > prev ? (n0 - prev) / (n - prev) : 1.0;
      tau_s = (i - 1 + frac) * dt;
      break;
    }
  }

  const auto min_it = std::min_element(norms.begin(), norms.end());
  const size_t j = static_cast<size_t>(min_it - norms.begin());
  double tau_o = j * dt;
  if (j > 0 && j + 1 < norms.size()) {
    // Vertex of the parabola through the squared norms around the minimum;
    // exact when the error crosses zero linearly.
    const double fm = norms[j - 1] * norms[j - 1], f0 = norms[j] * norms[j],
                 fp = norms[j + 1] * norms[j + 1];
    const double denom = fm - 2.0 * f0 + fp;
    if (denom > 0.0) {
      tau_o += 0.5 * dt * (fm - fp) / denom;
    }
  }
  if (std::isfinite(tau_s)) tau_o = std::min(tau_o, tau_s);
  return AuxiliaryGain{tau_o / T, tau_s, tau_o};
}

}  // namespace sikm
