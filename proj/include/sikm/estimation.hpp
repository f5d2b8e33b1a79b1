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

// Data-driven estimate of theta from simulated interval ratios.
//
// Every sampling interval gives y = ||e_{h+1}|| <= s^T theta + b with
//
//   s = [T^2 k^2, T, T^2 k, T^2] ||e_h||,   b = |1 - k T| ||e_h||,
//
// and the estimate is the smallest theta >= 0 consistent with all samples.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sikm/analysis.hpp"
#include "sikm/control.hpp"
#include "sikm/kernels.hpp"
#include "sikm/kinematics.hpp"
#include "sikm/trajectory.hpp"

namespace sikm {

struct EstimationSample {
  double k = 0.0;
  double T = 0.0;
  double e_h = 0.0;   // ||e(hT)||
  double e_h1 = 0.0;  // ||e((h+1)T)||

  double y() const { return e_h1; }
  // Ordered as (mu, alpha, gamma1, gamma2).
  Eigen::Vector4d s() const;
  double b() const;
  // y - s^T theta - b; nonpositive when the sample is satisfied.
  double slack(const ThetaParams& th) const;
};

class InfeasibleEstimation : public std::runtime_error {
 public:
  InfeasibleEstimation(const std::string& what, std::vector<std::size_t> idx)
      : std::runtime_error(what), indices_(std::move(idx)) {}
  const std::vector<std::size_t>& indices() const { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

struct KktResidual {
  double stationarity = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = 0.0;
  double primal_feasibility = 0.0;

  double max() const;
};

struct EstimationResult {
  ThetaParams theta;
  KktResidual kkt;
  std::size_t num_samples = 0;
  std::size_t screened_constraints = 0;  // sample rows kept after screening
  std::vector<std::size_t> active_samples;
  int iterations = 0;
};

// Minimizes ||theta||^2 subject to theta >= 0 and s_i^T theta >= y_i - b_i
// with a dual active-set method. Throws InfeasibleEstimation when some
// sample has s_i = 0 and y_i > b_i, and std::invalid_argument on empty or
// non-finite input.
EstimationResult estimate_theta(const std::vector<EstimationSample>& samples);

struct SweepSpec {
  std::shared_ptr<const SquareSystem> system;
  TrajectoryFamily trajectory;
  StrategyKind strategy = StrategyKind::kSikmD;
  std::vector<double> gains;
  std::vector<double> periods;
  std::vector<Vec> initial_errors;
  int runs_per_cell = 1;
  int intervals = 10;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  // Integrator substep as a fraction of T.
  double dt_fraction = 1.0 / 200.0;
};

struct SweepFailure {
  double k = 0.0;
  double T = 0.0;
  std::size_t initial_error = 0;
  int run = 0;
  std::string message;
};

struct SweepResult {
  std::vector<EstimationSample> samples;
  std::vector<SweepFailure> failures;
  std::size_t runs = 0;
};

// One sample per completed interval with ||e_h|| > 1e-10, over every
// (k, T, e(0), run) cell. Run r of cell c is seeded from (seed, c, r) only,
// so the result does not depend on scheduling.
SweepResult collect_samples(const SweepSpec& spec,
                            Execution exec = Execution::kParallel);

}  // namespace sikm
