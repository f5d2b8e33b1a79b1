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

#include "sikm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sikm/error_flow.hpp"

namespace sikm {

namespace {

constexpr double kZeroError = 1e-12;
constexpr double kRelSlack = 1e-12;
constexpr double kAbsSlack = 1e-15;

bool exceeds(double value, double limit) {
  return value > limit * (1.0 + kRelSlack) + kAbsSlack;
}

class Recorder {
 public:
  Recorder(SimTrace& trace, const ReferenceTrajectory& traj)
      : trace_(trace), traj_(traj) {}

  void add(double t, const Vec& e, const Vec& u, double k, bool sample) {
    const Vec qr = traj_.sample(clamp_time(traj_, t)).q;
    const Vec q = qr + e;
    Vec err = q - qr;
    trace_.t.push_back(t);
    trace_.e_norm.push_back(err.norm());
    trace_.q.push_back(q);
    trace_.qr.push_back(qr);
    trace_.e.push_back(std::move(err));
    trace_.u.push_back(u);
    trace_.k.push_back(k);
    trace_.is_sample.push_back(sample);
  }

 private:
  SimTrace& trace_;
  const ReferenceTrajectory& traj_;
};

AbortReport singular_abort(double t, const SingularConfiguration& err) {
  return AbortReport{AbortReport::Cause::kSingularity, t, err.configuration(),
                     err.min_singular_value(), err.what()};
}

double choose_gain(const SimConfig& cfg, const ReferenceTrajectory& traj,
                   const SampledState& state) {
  const ControlStrategy& s = cfg.strategy;
  if (const auto* off = std::get_if<OfflineGain>(&s.gain)) return off->k;
  const auto& on = std::get<OnlineGain>(s.gain);
  if (on.mode == OnlineMode::kAuxiliary) {
    return auxiliary_gain(*cfg.system, state.q_h, state.qr_h, s.T,
                          on.aux_horizon, on.aux_dt, cfg.guard)
        .k;
  }
  return online_gain(s.kind, *cfg.system, traj, state, s.T, on.search,
                     cfg.gain_exec, cfg.guard)
      .k;
}

}  // namespace

int SimConfig::substeps_per_interval() const {
  const double T = strategy.T;
  const double step = dt.value_or(T / 200.0);
  return static_cast<int>(std::ceil(T / step - 1e-9));
}

double SimConfig::substep() const {
  return strategy.T / substeps_per_interval();
}

int SimConfig::num_intervals() const {
  return static_cast<int>(std::llround(horizon / strategy.T));
}

void SimConfig::validate() const {
  if (!system) throw std::invalid_argument("simulation: no system");
  strategy.validate();
  const double T = strategy.T;
  if (dt && !(*dt > 0.0 && *dt <= T / 50.0 * (1.0 + 1e-12))) {
    throw std::invalid_argument("simulation: dt must lie in (0, T/50]");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("simulation: horizon must be positive");
  }
  const double intervals = horizon / T;
  if (std::abs(intervals - std::round(intervals)) > 1e-9 * std::max(1.0, intervals) ||
      std::round(intervals) < 1.0) {
    throw std::invalid_argument("simulation: horizon must be a multiple of T");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw std::invalid_argument("simulation: noise sigma must be nonnegative");
  }
  if (initial_error.size() != system->dim() || !initial_error.allFinite()) {
    throw std::invalid_argument("simulation: initial error must be finite with length dim");
  }
  if (trajectory.duration < horizon * (1.0 - 1e-12)) {
    throw std::invalid_argument("simulation: trajectory shorter than horizon");
  }
}

std::vector<std::size_t> SimTrace::sample_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < is_sample.size(); ++i) {
    if (is_sample[i]) idx.push_back(i);
  }
  return idx;
}

SimTrace run(const SimConfig& cfg) {
  cfg.validate();
  const SquareSystem& sys = *cfg.system;
  const ReferenceTrajectory traj = make_trajectory(cfg.trajectory, sys.dim());
  const StrategyKind kind = cfg.strategy.kind;
  const double T = cfg.strategy.T;
  const int m = cfg.substeps_per_interval();
  const double dt = T / m;
  const int intervals = cfg.num_intervals();

  SimTrace trace;
  trace.T = T;
  trace.dim = sys.dim();
  const std::size_t points = static_cast<std::size_t>(intervals) * m + 1;
  trace.t.reserve(points);
  Recorder rec(trace, traj);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vec e = cfg.initial_error;
  Vec last_u = Vec::Zero(sys.dim());
  double last_k = 0.0;
  for (int h = 0; h < intervals; ++h) {
    const double t_h = h * T;
    const Vec q_true = traj.sample(clamp_time(traj, t_h)).q + e;
    Vec measured = q_true;
    if (cfg.noise_sigma > 0.0) {
      for (Eigen::Index j = 0; j < measured.size(); ++j) {
        measured[j] += cfg.noise_sigma * normal(rng);
      }
    }
    SampledState state = make_sampled_state(traj, t_h, measured, 0.0);
    try {
      state.k_h = choose_gain(cfg, traj, state);
    } catch (const InfeasibleStep& err) {
      trace.abort = AbortReport{AbortReport::Cause::kInfeasibleGain, t_h,
                                measured, 0.0, err.what()};
      return trace;
    } catch (const SingularConfiguration& err) {
      trace.abort = singular_abort(t_h, err);
      return trace;
    }

    try {
      const IntervalFlow flow(sys, traj, kind, state, state.k_h, cfg.guard);
      for (int i = 0; i < m; ++i) {
        const double t = t_h + i * dt;
        last_u = flow.command(t);
        rec.add(t, e, last_u, state.k_h, i == 0);
        e = rk4_step(flow, t, e, dt);
        if (!e.allFinite()) {
          trace.abort = AbortReport{AbortReport::Cause::kSingularity, t + dt,
                                    traj.sample(clamp_time(traj, t)).q + e, 0.0,
                                    "error flow diverged to a non-finite state"};
          return trace;
        }
      }
      last_u = flow.command(t_h + T);
    } catch (const SingularConfiguration& err) {
      trace.abort = singular_abort(trace.t.empty() ? t_h : trace.t.back(), err);
      return trace;
    }
    last_k = state.k_h;
  }
  rec.add(intervals * T, e, last_u, last_k, true);
  return trace;
}

std::vector<SimTrace> run_batch(const std::vector<SimConfig>& configs,
                                Execution exec) {
  for (const auto& c : configs) c.validate();
  std::vector<SimTrace> out(configs.size());
  for_each_index(configs.size(), exec,
                 [&](std::size_t i) { out[i] = run(configs[i]); });
  return out;
}

Metrics compute_metrics(const SimTrace& trace) {
  if (trace.size() == 0) {
    throw std::invalid_argument("compute_metrics: empty trace");
  }
  Metrics m;
  const auto& n = trace.e_norm;
  m.max = *std::max_element(n.begin(), n.end());
  m.final = n.back();
  const double span = trace.t.back() - trace.t.front();
  if (span > 0.0) {
    double area = 0.0;
    for (std::size_t i = 1; i < n.size(); ++i) {
      area += 0.5 * (n[i] + n[i - 1]) * (trace.t[i] - trace.t[i - 1]);
    }
    m.mean = area / span;
  } else {
    m.mean = n.front();
  }

  const auto idx = trace.sample_indices();
  for (std::size_t h = 0; h + 1 < idx.size(); ++h) {
    const double start = n[idx[h]];
    if (start <= kZeroError) {
      m.ratios.push_back(0.0);
      continue;
    }
    m.ratios.push_back(n[idx[h + 1]] / start);
    bool violated = false;
    for (std::size_t j = idx[h] + 1; j <= idx[h + 1]; ++j) {
      violated = violated || exceeds(n[j], start);
    }
    if (violated) ++m.violations;
  }
  return m;
}

ContractionReport check_contractive(const SimTrace& trace, double rho) {
  ContractionReport report;
  const auto& n = trace.e_norm;
  const auto idx = trace.sample_indices();
  for (std::size_t h = 0; h + 1 < idx.size(); ++h) {
    const double start = n[idx[h]];
    if (start <= kZeroError) continue;
    std::size_t worst = idx[h];
    for (std::size_t j = idx[h] + 1; j < idx[h + 1]; ++j) {
      if (n[j] > n[worst]) worst = j;
    }
    if (exceeds(n[worst], start)) {
      report.violations.push_back({ContractionViolation::Kind::kInterior, h,
                                   trace.t[worst], n[worst], start});
    }
    const double end = n[idx[h + 1]];
    if (exceeds(end, rho * start)) {
      report.violations.push_back({ContractionViolation::Kind::kBoundary, h,
                                   trace.t[idx[h + 1]], end / start, rho});
    }
  }
  report.contractive = report.violations.empty();
  return report;
}

bool exponential_envelope_check(const SimTrace& trace, double rho, double T) {
  if (trace.size() == 0) return true;
  const double e0 = trace.e_norm.front();
  const double t0 = trace.t.front();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double envelope = std::pow(rho, (trace.t[i] - t0) / T - 1.0) * e0;
    if (exceeds(trace.e_norm[i], envelope)) return false;
  }
  return true;
}

PsBoundReport ps_bound_check(const SimTrace& trace, double rho, double beta,
                             double d) {
  PsBoundReport r;
  const auto idx = trace.sample_indices();
  for (std::size_t h = 0; h + 1 < idx.size(); ++h) {
    r.max_increment = std::max(
        r.max_increment, (trace.qr[idx[h + 1]] - trace.qr[idx[h]]).norm());
  }
  std::ostringstream why;
  if (!(rho > 0.0 && rho < 1.0)) why << "rho must lie in (0, 1); ";
  if (!(d > 0.0)) why << "d must be positive; ";
  if (!(beta >= 0.0 && beta < (1.0 - rho) * d)) {
    why << "beta must satisfy 0 <= beta < (1 - rho) d; ";
  }
  if (exceeds(r.max_increment, beta)) {
    why << "reference increment " << r.max_increment << " exceeds beta; ";
  }
  if (idx.empty() || trace.e_norm[idx.front()] > d) {
    why << "initial error outside the radius d; ";
  }
  r.hypothesis_message = why.str();
  r.hypotheses_hold = r.hypothesis_message.empty();
  if (!r.hypotheses_hold) return r;

  r.asymptote = beta / (1.0 - rho);
  r.bound = rho * d + r.asymptote;
  bool ok = true;
  for (std::size_t h = 1; h < idx.size(); ++h) {
    const double eh = trace.e_norm[idx[h]];
    r.worst_sample_error = std::max(r.worst_sample_error, eh);
    ok = ok && !exceeds(eh, r.bound);
  }
  // A finite trace reaches the limit only up to the decaying rho^h d term.
  const std::size_t tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(0.2 * idx.size())));
  for (std::size_t h = idx.size() - tail; h < idx.size(); ++h) {
    const double eh = trace.e_norm[idx[h]];
    r.worst_tail_error = std::max(r.worst_tail_error, eh);
    const double limit =
        r.asymptote * (1.0 + 1e-3) + std::pow(rho, static_cast<double>(h)) * d;
    ok = ok && !exceeds(eh, limit);
  }
  r.bound_holds = ok;
  return r;
}

}  // namespace sikm
