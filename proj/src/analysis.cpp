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

#include "sikm/analysis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sikm/control.hpp"

namespace sikm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double poly(const ThetaParams& th, double k) {
  return k * k * th.mu + k * th.gamma1 + th.gamma2;
}

void require_formulas(const ThetaParams& th) {
  if (!th.valid_for_formulas()) {
    throw std::invalid_argument(
        "theta must be finite, nonnegative, with mu > 0 and gamma2 > 0");
  }
}

void require_gain_above_alpha(const ThetaParams& th, double k) {
  require_formulas(th);
  if (!(k > th.alpha)) {
    std::ostringstream os;
    os << "gain k = " << k << " is not above alpha = " << th.alpha;
    throw AnalysisDomainError(os.str());
  }
}

double tau_o1(const ThetaParams& th, double k) {
  return (k - th.alpha) / (2.0 * poly(th, k));
}

bool on_reciprocal_k_branch(const ThetaParams& th, double k) {
  const auto kbb = k_bar_bar(th);
  return kbb && k > *kbb;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return v;
}

}  // namespace

bool ThetaParams::valid() const {
  for (double v : {mu, alpha, gamma1, gamma2}) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
  }
  return true;
}

bool ThetaParams::valid_for_formulas() const {
  return valid() && mu > 0.0 && gamma2 > 0.0;
}

double ThetaParams::norm() const {
  return std::sqrt(mu * mu + alpha * alpha + gamma1 * gamma1 + gamma2 * gamma2);
}

double z_bound(const ThetaParams& th, double k, double tau) {
  return std::abs(1.0 - k * tau) + tau * th.alpha + tau * tau * poly(th, k);
}

double tau_s1(const ThetaParams& th, double k) {
  return (k - th.alpha) / poly(th, k);
}

double tau_s2(const ThetaParams& th, double k) {
  const double b = th.alpha + k;
  return 4.0 / (b + std::sqrt(b * b + 8.0 * poly(th, k)));
}

std::optional<double> k_bar(const ThetaParams& th) {
  if (!(th.mu < 1.0)) return std::nullopt;
  const double a = th.alpha + th.gamma1;
  return (a + std::sqrt(a * a + 4.0 * th.gamma2 * (1.0 - th.mu))) /
         (2.0 * (1.0 - th.mu));
}

std::optional<double> k_bar_bar(const ThetaParams& th) {
  if (!(th.mu < 0.5)) return std::nullopt;
  const double a = th.alpha + 2.0 * th.gamma1;
  return (a + std::sqrt(a * a + 8.0 * th.gamma2 * (1.0 - 2.0 * th.mu))) /
         (2.0 * (1.0 - 2.0 * th.mu));
}

double tau_s(const ThetaParams& th, double k) {
  require_gain_above_alpha(th, k);
  const auto kb = k_bar(th);
  if (kb && k > *kb) return tau_s2(th, k);
  return tau_s1(th, k);
}

double tau_o(const ThetaParams& th, double k) {
  require_gain_above_alpha(th, k);
  return on_reciprocal_k_branch(th, k) ? 1.0 / k : tau_o1(th, k);
}

double rho_o_of_k(const ThetaParams& th, double k) {
  require_gain_above_alpha(th, k);
  if (on_reciprocal_k_branch(th, k)) {
    return th.mu + (th.alpha + th.gamma1) / k + th.gamma2 / (k * k);
  }
  const double d = th.alpha - k;
  return 1.0 - d * d / (4.0 * poly(th, k));
}

double tau_mk(const ThetaParams& th) {
  if (th.gamma1 == 0.0) return th.mu < 0.5 ? kInf : -kInf;
  return (1.0 - 2.0 * th.mu) / th.gamma1;
}

double tau_v2(const ThetaParams& th) {
  // Smallest positive root of (-g1^2 + 4 g2 mu) t^2 + 2 (g1 + 2 alpha mu) t
  // - 1 = 0, written to stay finite when the leading coefficient vanishes.
  const double b = th.gamma1 + 2.0 * th.alpha * th.mu;
  const double d = -th.gamma1 * th.gamma1 + 4.0 * th.gamma2 * th.mu;
  return 1.0 / (b + std::sqrt(b * b + d));
}

double tau_m_tau(const ThetaParams& th) {
  const double inv_g1 = th.gamma1 > 0.0 ? 1.0 / th.gamma1 : kInf;
  return std::min(inv_g1, tau_v2(th));
}

double tau_edge_1k(const ThetaParams& th) {
  if (!(th.mu < 1.0)) return 0.0;
  const double a = th.alpha + th.gamma1;
  return (-a + std::sqrt(a * a + 4.0 * th.gamma2 * (1.0 - th.mu))) /
         (2.0 * th.gamma2);
}

namespace {

enum class KoBranch { kInteriorGain, kReciprocal };

KoBranch k_o_branch(const ThetaParams& th, double tau) {
  require_formulas(th);
  if (!(tau > 0.0)) {
    throw AnalysisDomainError("sampling time must be positive");
  }
  if (th.mu < 0.5 && tau <= tau_mk(th)) {
    const double edge = tau_edge_1k(th);
    if (!(tau < edge)) {
      std::ostringstream os;
      os << "tau = " << tau << " outside the window (0, " << edge
         << ") of the k_o = 1/tau branch";
      throw AnalysisDomainError(os.str());
    }
    return KoBranch::kReciprocal;
  }
  const double hi = tau_m_tau(th);
  if (!(tau < hi)) {
    std::ostringstream os;
    os << "tau = " << tau << " outside the window (" << std::max(0.0, tau_mk(th))
       << ", " << hi << ") of the interior optimal gain";
    throw AnalysisDomainError(os.str());
  }
  return KoBranch::kInteriorGain;
}

}  // namespace

double k_o(const ThetaParams& th, double tau) {
  if (k_o_branch(th, tau) == KoBranch::kReciprocal) return 1.0 / tau;
  return (1.0 - tau * th.gamma1) / (2.0 * tau * th.mu);
}

double rho_o_of_tau(const ThetaParams& th, double tau) {
  if (k_o_branch(th, tau) == KoBranch::kReciprocal) {
    return th.gamma2 * tau * tau + (th.alpha + th.gamma1) * tau + th.mu;
  }
  const double d = -th.gamma1 * th.gamma1 + 4.0 * th.gamma2 * th.mu;
  const double b = th.gamma1 + 2.0 * th.alpha * th.mu;
  return (d * tau * tau + 2.0 * b * tau + 4.0 * th.mu - 1.0) / (4.0 * th.mu);
}

Thresholds thresholds(const ThetaParams& th) {
  require_formulas(th);
  Thresholds out;
  out.t_max = th.alpha > 0.0 ? 2.0 / th.alpha : kInf;
  out.k_star = th.alpha + std::sqrt(th.alpha * th.alpha +
                                    (th.gamma2 + th.alpha * th.gamma1) / th.mu);
  out.tau_cr_paper = tau_s1(th, out.k_star);
  out.k_bar = k_bar(th);
  {
    const double a = th.alpha + th.gamma1;
    const double disc = a * a + 4.0 * th.gamma2 * (1.0 - th.mu);
    out.k_bar_formula = disc >= 0.0 && th.mu != 1.0
                            ? (a + std::sqrt(disc)) / (2.0 * (1.0 - th.mu))
                            : kNaN;
  }
  out.k_bar_bar = k_bar_bar(th);

  // Log-spaced scan of k - alpha, then golden-section refinement between the
  // neighbours of the best scan point.
  constexpr int kScan = 4000;
  const double k_hi = 1e3;
  const double lo = std::log(1e-8 * (1.0 + th.alpha));
  const double hi = std::log(k_hi - th.alpha);
  auto k_of = [&](int i) {
    return th.alpha + std::exp(lo + (hi - lo) * i / (kScan - 1));
  };
  int best = 0;
  double best_val = -kInf;
  for (int i = 0; i < kScan; ++i) {
    const double v = tau_s(th, k_of(i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = k_of(std::max(best - 1, 0));
  const double b = k_of(std::min(best + 1, kScan - 1));
  const double k_best = golden_section_minimize(
      [&](double k) { return -tau_s(th, k); }, a, b, 100);
  const double refined = tau_s(th, k_best);
  if (refined >= best_val) {
    out.tau_cr_numeric = refined;
    out.k_at_tau_cr_numeric = k_best;
  } else {
    out.tau_cr_numeric = best_val;
    out.k_at_tau_cr_numeric = k_of(best);
  }
  return out;
}

RegionGrid region_grid(const ThetaParams& th, double k_lo, double k_hi,
                       std::size_t nk, double tau_lo, double tau_hi,
                       std::size_t ntau, Execution exec) {
  if (!th.valid()) throw std::invalid_argument("region_grid: invalid theta");
  if (!(k_lo > 0.0 && k_hi > k_lo && tau_lo > 0.0 && tau_hi > tau_lo) ||
      nk < 2 || ntau < 2) {
    throw std::invalid_argument(
        "region_grid: ranges must be positive and nonempty with >= 2 points");
  }
  RegionGrid g;
  g.k = linspace(k_lo, k_hi, nk);
  g.tau = linspace(tau_lo, tau_hi, ntau);
  g.z.assign(nk * ntau, 0.0);
  std::vector<char> stable(nk * ntau, 0);
  for_each_index(ntau, exec, [&](std::size_t i) {
    for (std::size_t j = 0; j < nk; ++j) {
      const double z = z_bound(th, g.k[j], g.tau[i]);
      g.z[i * nk + j] = z;
      stable[i * nk + j] = z < 1.0;
    }
  });
  g.stable.assign(stable.begin(), stable.end());

  const bool formulas = th.valid_for_formulas();
  g.tau_s_of_k.assign(nk, kNaN);
  g.tau_o_of_k.assign(nk, kNaN);
  g.k_o_of_tau.assign(ntau, kNaN);
  if (!formulas) return g;
  for (std::size_t j = 0; j < nk; ++j) {
    if (g.k[j] > th.alpha) {
      g.tau_s_of_k[j] = tau_s(th, g.k[j]);
      g.tau_o_of_k[j] = tau_o(th, g.k[j]);
    }
  }
  for (std::size_t i = 0; i < ntau; ++i) {
    try {
      g.k_o_of_tau[i] = k_o(th, g.tau[i]);
    } catch (const AnalysisDomainError&) {
    }
  }
  return g;
}

GainForT gain_for_T(const ThetaParams& th, double T, double k_cap) {
  require_formulas(th);
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw std::invalid_argument("gain_for_T: T must be positive");
  }
  if (!(k_cap > 0.0)) {
    throw std::invalid_argument("gain_for_T: k_cap must be positive");
  }
  // tau(k): the sampling time at which k is the optimal gain. It is the
  // inverse of k_o and strictly decreasing in k.
  auto tau_of_k = [&](double k) {
    const double reciprocal = k > 0.0 ? 1.0 / k : kInf;
    const double denom = 2.0 * th.mu * k + th.gamma1;
    const double interior = denom > 0.0 ? 1.0 / denom : kInf;
    return std::min(reciprocal, interior);
  };

  GainForT out;
  if (tau_of_k(k_cap) > T) {
    out.k = k_cap;
    out.z = z_bound(th, out.k, T);
    out.verdict = out.z < 1.0 ? GainForT::Verdict::kCapped
                              : GainForT::Verdict::kNoStabilizingGain;
    return out;
  }
  if (th.gamma1 > 0.0 && T >= 1.0 / th.gamma1) {
    out.k = 0.0;
    out.z = z_bound(th, 0.0, T);
    out.verdict = GainForT::Verdict::kNoStabilizingGain;
    return out;
  }
  double lo = 0.0;
  double hi = k_cap;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tau_of_k(mid) > T) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.k = 0.5 * (lo + hi);
  out.z = z_bound(th, out.k, T);
  out.verdict = out.z < 1.0 ? GainForT::Verdict::kStabilizing
                            : GainForT::Verdict::kNoStabilizingGain;
  return out;
}

}  // namespace sikm
