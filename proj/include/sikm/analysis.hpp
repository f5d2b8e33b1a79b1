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

// Convergence-rate bound for sampled SIKM and its closed-form optima.
//
// With theta = (mu, alpha, gamma1, gamma2) the error contracts over one
// interval of length tau by at most
//
//   z(k, tau) = |1 - k tau| + tau alpha + tau^2 (k^2 mu + k gamma1 + gamma2).
//
// Writing P(k) = k^2 mu + k gamma1 + gamma2, the stability boundary, the best
// sampling time for a given gain and the best gain for a given sampling time
// all have closed forms with branches that switch where tau = 1/k.

#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "sikm/kernels.hpp"

namespace sikm {

class AnalysisDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ThetaParams {
  double mu = 0.0;
  double alpha = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;

  // All components finite and nonnegative.
  bool valid() const;
  // valid() plus mu > 0 and gamma2 > 0, needed by the closed forms.
  bool valid_for_formulas() const;
  double norm() const;
};

double z_bound(const ThetaParams& th, double k, double tau);

// Stability boundary tau_s(k): z(k, tau_s) = 1 and z < 1 on (0, tau_s).
// Throws AnalysisDomainError for k <= alpha.
double tau_s(const ThetaParams& th, double k);
// Root of z = 1 on the tau < 1/k side.
double tau_s1(const ThetaParams& th, double k);
// Root of z = 1 on the tau > 1/k side.
double tau_s2(const ThetaParams& th, double k);

// argmin over tau of z(k, tau) and its value. Throw for k <= alpha.
double tau_o(const ThetaParams& th, double k);
double rho_o_of_k(const ThetaParams& th, double k);

// argmin over k of z(k, tau) and its value. Throw AnalysisDomainError when
// tau lies outside the window where the minimum is below one.
double k_o(const ThetaParams& th, double tau);
double rho_o_of_tau(const ThetaParams& th, double tau);

// Branch switch points; nullopt where the branch does not exist.
std::optional<double> k_bar(const ThetaParams& th);        // mu < 1
std::optional<double> k_bar_bar(const ThetaParams& th);    // mu < 1/2
// Window ends of the optimal-gain formulas.
double tau_mk(const ThetaParams& th);        // (1 - 2 mu) / gamma1
double tau_v2(const ThetaParams& th);        // rho_tau1 = 1
double tau_m_tau(const ThetaParams& th);     // min(1 / gamma1, tau_v2)
double tau_edge_1k(const ThetaParams& th);   // rho_tau2 = 1, mu < 1

struct Thresholds {
  double t_max = 0.0;          // 2 / alpha
  double k_star = 0.0;         // stationary point of tau_s1
  double tau_cr_paper = 0.0;   // tau_s1(k_star)
  double tau_cr_numeric = 0.0; // max of tau_s over (alpha, 1e3]
  double k_at_tau_cr_numeric = 0.0;
  std::optional<double> k_bar;
  // Raw k_bar formula value, NaN when its square root is imaginary. Only the
  // mu < 1 value enters tau_s.
  double k_bar_formula = 0.0;
  std::optional<double> k_bar_bar;
};

Thresholds thresholds(const ThetaParams& th);

struct RegionGrid {
  std::vector<double> k;    // columns
  std::vector<double> tau;  // rows
  // z and the mask are row-major: index = i_tau * k.size() + i_k.
  std::vector<double> z;
  std::vector<bool> stable;
  // Overlays; NaN where the curve is undefined.
  std::vector<double> tau_s_of_k;
  std::vector<double> tau_o_of_k;
  std::vector<double> k_o_of_tau;

  double z_at(std::size_t i_tau, std::size_t i_k) const {
    return z[i_tau * k.size() + i_k];
  }
};

// Uniform grids with `nk` and `ntau` points over the closed ranges.
RegionGrid region_grid(const ThetaParams& th, double k_lo, double k_hi,
                       std::size_t nk, double tau_lo, double tau_hi,
                       std::size_t ntau, Execution exec = Execution::kParallel);

struct GainForT {
  enum class Verdict { kStabilizing, kCapped, kNoStabilizingGain };
  Verdict verdict = Verdict::kNoStabilizingGain;
  double k = 0.0;
  double z = 0.0;  // z(k, T)
};

// Reads k off the curve tau(k_o) at tau = T, i.e. the inverse of k_o found
// by bisection on [0, k_cap].
GainForT gain_for_T(const ThetaParams& th, double T, double k_cap = 1e3);

}  // namespace sikm
