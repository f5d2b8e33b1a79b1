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

// Closed-loop simulation of sampled tracking controllers.
//
// The plant q_dot = A_q^{-1} u is integrated in error coordinates with
// fixed-step RK4. At every multiple of T the controller samples the
// configuration, optionally corrupted by Gaussian noise, and freezes its
// feedback term and gain until the next sample.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sikm/control.hpp"
#include "sikm/kernels.hpp"
#include "sikm/kinematics.hpp"
#include "sikm/trajectory.hpp"

namespace sikm {

struct SimConfig {
  std::shared_ptr<const SquareSystem> system;
  TrajectoryFamily trajectory;
  ControlStrategy strategy;
  // Integrator substep; T/200 when unset. Rounded down so T/dt is integral.
  std::optional<double> dt;
  double horizon = 10.0;
  // e(0) = q(0) - q^r(0).
  Vec initial_error;
  // Per-coordinate standard deviation of the sampled measurement; 0 = none.
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  ConditioningGuard guard;
  // Parallelism of the online gain search inside one run.
  Execution gain_exec = Execution::kSerial;

  double substep() const;
  int substeps_per_interval() const;
  int num_intervals() const;
  // Throws std::invalid_argument.
  void validate() const;
};

struct AbortReport {
  enum class Cause { kSingularity, kInfeasibleGain };
  Cause cause = Cause::kSingularity;
  double t = 0.0;
  Vec q;
  double min_singular_value = 0.0;
  std::string message;
};

struct SimTrace {
  double T = 0.0;
  int dim = 0;
  std::vector<double> t;
  std::vector<Vec> q;
  std::vector<Vec> qr;
  std::vector<Vec> e;  // q - qr, recomputed from the stored columns
  std::vector<double> e_norm;
  std::vector<Vec> u;
  std::vector<double> k;  // gain active at each point
  std::vector<bool> is_sample;
  std::optional<AbortReport> abort;

  std::size_t size() const { return t.size(); }
  bool completed() const { return !abort.has_value(); }
  // Indices of the sampling-instant points, the final point included.
  std::vector<std::size_t> sample_indices() const;
};

// Deterministic for a given config; never throws on singularity, which is
// reported through SimTrace::abort instead.
SimTrace run(const SimConfig& config);

// Runs configs concurrently; results keep the input order.
std::vector<SimTrace> run_batch(const std::vector<SimConfig>& configs,
                                Execution exec = Execution::kParallel);

struct Metrics {
  double mean = 0.0;   // trapezoidal time average of ||e||
  double max = 0.0;
  double final = 0.0;
  // ||e((h+1)T)|| / ||e(hT)||, 0 when ||e(hT)|| <= 1e-12.
  std::vector<double> ratios;
  // Intervals breaking monotone decrease inside or across the interval.
  int violations = 0;
};

// Requires a nonempty trace.
Metrics compute_metrics(const SimTrace& trace);

struct ContractionViolation {
  enum class Kind { kInterior, kBoundary };
  Kind kind = Kind::kInterior;
  std::size_t interval = 0;
  double t = 0.0;
  double value = 0.0;  // offending norm or ratio
  double limit = 0.0;
};

struct ContractionReport {
  bool contractive = true;
  std::vector<ContractionViolation> violations;
};

// Intervals starting at ||e(hT)|| <= 1e-12 are skipped.
ContractionReport check_contractive(const SimTrace& trace, double rho);

// ||e(t)|| <= rho^(t/T - 1) ||e(0)|| at every trace point.
bool exponential_envelope_check(const SimTrace& trace, double rho, double T);

struct PsBoundReport {
  bool hypotheses_hold = true;
  std::string hypothesis_message;
  bool bound_holds = false;
  double bound = 0.0;       // rho d + beta / (1 - rho)
  double asymptote = 0.0;   // beta / (1 - rho)
  double max_increment = 0.0;
  double worst_sample_error = 0.0;
  double worst_tail_error = 0.0;
};

// The bound is checked at sampling instants h >= 1 and the asymptote on the
// last 20% of them. Reference increments are read from the trace.
PsBoundReport ps_bound_check(const SimTrace& trace, double rho, double beta,
                             double d);

}  // namespace sikm
