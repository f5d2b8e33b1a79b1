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


#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "sikm/analysis.hpp"
#include "test_support.hpp"

namespace sikm {
namespace {

using testing::bisect;
using testing::grid_argmin;
using testing::reference_theta;
using testing::random_theta;

double z_of(const ThetaParams& th, double k, double tau) {
  return std::abs(1.0 - k * tau) + tau * th.alpha +
         tau * tau * (k * k * th.mu + k * th.gamma1 + th.gamma2);
}

std::vector<double> gains_above_alpha(const ThetaParams& th) {
  std::vector<double> ks;
  for (int i = 0; i < 20; ++i) ks.push_back(th.alpha + 0.01 + 0.25 * i * (1.0 + th.alpha));
  return ks;
}

TEST(ZBound, ReferenceValue) {
  EXPECT_NEAR(z_bound(reference_theta(), 1.0, 0.5), 0.645, 1e-15);
}

TEST(ZBound, TendsToOneAsTauVanishes) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NEAR(z_bound(random_theta(rng), 2.0, 1e-12), 1.0, 1e-10);
  }
}

TEST(ZBound, ConstantReferenceAtUnitProduct) {
  const ThetaParams th{0.3, 0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(z_bound(th, 2.0, 0.5), 0.3);
}

TEST(ZBound, MatchesDirectFormula) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const ThetaParams th = random_theta(rng);
    const double k = u(rng), tau = u(rng);
    EXPECT_NEAR(z_bound(th, k, tau), z_of(th, k, tau), 1e-12 * z_of(th, k, tau));
  }
}

TEST(TauS, ReferenceCaseSplit) {
  const ThetaParams th = reference_theta();
  EXPECT_NEAR(tau_s(th, 1.0), 1.295001021033116, 1e-12);
  EXPECT_EQ(tau_s(th, 1.0), tau_s2(th, 1.0));
  EXPECT_NEAR(tau_s(th, 0.4), 1.110197368421053, 1e-12);
  EXPECT_EQ(tau_s(th, 0.4), tau_s1(th, 0.4));
  EXPECT_NEAR(z_bound(th, 1.0, tau_s(th, 1.0)), 1.0, 1e-9);
  EXPECT_NEAR(z_bound(th, 0.4, tau_s(th, 0.4)), 1.0, 1e-9);
}

TEST(TauS, VanishesAtAlpha) {
  const ThetaParams th = reference_theta();
  EXPECT_LT(tau_s(th, th.alpha + 1e-9), 1e-7);
  EXPECT_THROW(tau_s(th, th.alpha), AnalysisDomainError);
  EXPECT_THROW(tau_s(th, 0.05), AnalysisDomainError);
}

TEST(TauS, SingleBranchAboveUnitMu) {
  const ThetaParams th{1.5, 0.1, 0.2, 0.3};
  EXPECT_FALSE(k_bar(th).has_value());
  for (double k = 0.2; k < 20.0; k += 0.7) EXPECT_EQ(tau_s(th, k), tau_s1(th, k));
}

TEST(TauS, MatchesBisectionRoot) {
  std::mt19937_64 rng(100);
  for (int n = 0; n < 50; ++n) {
    const ThetaParams th = random_theta(rng);
    for (double k : gains_above_alpha(th)) {
      const double root =
          bisect([&](double t) { return z_of(th, k, t) - 1.0; }, 1e-9, 10.0 / th.alpha);
      EXPECT_NEAR(tau_s(th, k), root, 1e-7) << "mu=" << th.mu << " k=" << k;
      EXPECT_NEAR(z_bound(th, k, tau_s(th, k)), 1.0, 1e-9);
    }
  }
}

TEST(TauO, ReferenceValues) {
  const ThetaParams th = reference_theta();
  EXPECT_DOUBLE_EQ(tau_o(th, 1.0), 1.0);
  EXPECT_NEAR(rho_o_of_k(th, 1.0), 0.45, 1e-12);
  const double p = 0.25 * th.mu + 0.5 * th.gamma1 + th.gamma2;
  EXPECT_NEAR(tau_o(th, 0.5), (0.5 - th.alpha) / (2.0 * p), 1e-15);
  EXPECT_NEAR(rho_o_of_k(th, 0.5),
              1.0 - (th.alpha - 0.5) * (th.alpha - 0.5) / (4.0 * p), 1e-12);
}

TEST(TauO, LargeMuUsesInteriorBranch) {
  const ThetaParams th{0.6, 0.1, 0.1, 0.1};
  for (double k = 0.15; k < 30.0; k *= 1.5) {
    const double p = k * k * th.mu + k * th.gamma1 + th.gamma2;
    EXPECT_NEAR(tau_o(th, k), (k - th.alpha) / (2.0 * p), 1e-15);
  }
}

TEST(TauO, MatchesDenseGridArgmin) {
  std::mt19937_64 rng(200);
  for (int n = 0; n < 50; ++n) {
    const ThetaParams th = random_theta(rng);
    for (double k : gains_above_alpha(th)) {
      const double ts = tau_s(th, k);
      const double arg = grid_argmin([&](double t) { return z_of(th, k, t); }, 0.0, ts);
      EXPECT_NEAR(tau_o(th, k), arg, 1e-6) << "mu=" << th.mu << " k=" << k;
      EXPECT_NEAR(rho_o_of_k(th, k), z_bound(th, k, tau_o(th, k)), 1e-12);
      EXPECT_LT(rho_o_of_k(th, k), 1.0);
    }
  }
}

TEST(KO, ReferenceReciprocalBranch) {
  const ThetaParams th = reference_theta();
  EXPECT_NEAR(tau_mk(th), 9.6, 1e-12);
  for (double tau : {0.1, 0.5, 0.75, 1.0, 1.2}) {
    EXPECT_DOUBLE_EQ(k_o(th, tau), 1.0 / tau);
    EXPECT_NEAR(rho_o_of_tau(th, tau), z_bound(th, 1.0 / tau, tau), 1e-12);
  }
}

TEST(KO, LargeMuInteriorBranch) {
  const ThetaParams th{0.8, 0.1, 0.2, 0.1};
  for (double tau : {0.05, 0.1, 0.3}) {
    EXPECT_NEAR(k_o(th, tau), (1.0 - tau * th.gamma1) / (2.0 * tau * th.mu), 1e-12);
  }
}

TEST(KO, OutsideWindowIsReported) {
  const ThetaParams th = reference_theta();
  EXPECT_THROW(k_o(th, 0.0), AnalysisDomainError);
  EXPECT_THROW(k_o(th, 20.0), AnalysisDomainError);
}

TEST(KO, MatchesDenseGridArgmin) {
  std::mt19937_64 rng(300);
  int evaluated = 0;
  for (int n = 0; n < 50; ++n) {
    const ThetaParams th = random_theta(rng);
    for (int i = 1; i <= 20; ++i) {
      const double tau = 0.1 * i;
      double k = 0.0;
      try {
        k = k_o(th, tau);
      } catch (const AnalysisDomainError&) {
        continue;
      }
      ++evaluated;
      const double arg =
          grid_argmin([&](double kk) { return z_of(th, kk, tau); }, 0.0, 2.0 / tau);
      EXPECT_NEAR(k, arg, 1e-6) << "mu=" << th.mu << " tau=" << tau;
      EXPECT_LE(k * tau, 1.0 + 1e-12);
      EXPECT_NEAR(rho_o_of_tau(th, tau), z_bound(th, k, tau), 1e-12);
      EXPECT_LT(rho_o_of_tau(th, tau), 1.0);
    }
  }
  EXPECT_GT(evaluated, 200);
}

TEST(Thresholds, ReferenceParameters) {
  const Thresholds t = thresholds(reference_theta());
  EXPECT_NEAR(t.t_max, 2.0 / 0.13, 1e-12);
  EXPECT_NEAR(t.k_star, 3.396022045240969, 1e-9);
  EXPECT_NEAR(t.tau_cr_paper, 4.240146968273125, 1e-9);
  EXPECT_NEAR(t.tau_cr_numeric, 1.712055967832882, 1e-6);
  ASSERT_TRUE(t.k_bar && t.k_bar_bar);
  EXPECT_NEAR(*t.k_bar, 0.5840930546597719, 1e-12);
  EXPECT_NEAR(*t.k_bar_bar, 0.8398627860347948, 1e-12);
  EXPECT_NEAR(t.k_at_tau_cr_numeric, *t.k_bar, 1e-5);
}

TEST(Thresholds, StationaryPointOfTauS1) {
  const ThetaParams th = reference_theta();
  const Thresholds t = thresholds(th);
  const double k = grid_argmin([&](double kk) { return -tau_s1(th, kk); }, 0.2, 20.0);
  EXPECT_NEAR(k, t.k_star, 1e-5);
  EXPECT_NEAR(tau_s1(th, k), t.tau_cr_paper, 1e-9);
}

TEST(Thresholds, NumericMaximumOverDenseGrid) {
  std::mt19937_64 rng(400);
  for (int n = 0; n < 10; ++n) {
    const ThetaParams th = random_theta(rng);
    const Thresholds t = thresholds(th);
    double best = 0.0;
    for (int i = 1; i <= 200000; ++i) {
      const double k = th.alpha * std::pow(1e3 / th.alpha, i / 200000.0);
      if (k > th.alpha) best = std::max(best, tau_s(th, k));
    }
    EXPECT_GE(t.tau_cr_numeric, best - 1e-9);
    EXPECT_LE(t.tau_cr_numeric, best * (1.0 + 1e-4));
  }
}

TEST(Thresholds, VanishingAlphaRemovesLimit) {
  EXPECT_TRUE(std::isinf(thresholds({0.02, 0.0, 0.1, 0.2}).t_max));
}

TEST(Thresholds, KBarBranchesOnMu) {
  const Thresholds t = thresholds({1.5, 0.1, 0.2, 0.3});
  EXPECT_FALSE(t.k_bar.has_value());
  EXPECT_FALSE(t.k_bar_bar.has_value());
  const Thresholds s = thresholds({0.7, 0.1, 0.2, 0.3});
  EXPECT_TRUE(s.k_bar.has_value());
  EXPECT_FALSE(s.k_bar_bar.has_value());
}

TEST(Region, ReferenceGridIsNonemptyAndBounded) {
  const RegionGrid g = region_grid(reference_theta(), 0.15, 5.0, 200, 0.01, 5.0, 200);
  ASSERT_EQ(g.z.size(), 40000u);
  std::size_t stable = 0;
  for (std::size_t i = 0; i < g.tau.size(); ++i) {
    for (std::size_t j = 0; j < g.k.size(); ++j) {
      const bool s = g.stable[i * g.k.size() + j];
      EXPECT_EQ(s, g.z_at(i, j) < 1.0);
      EXPECT_NEAR(g.z_at(i, j), z_of(reference_theta(), g.k[j], g.tau[i]), 1e-12);
      stable += s ? 1 : 0;
    }
  }
  EXPECT_GT(stable, 0u);
  EXPECT_LT(stable, g.z.size());
  // No stable cell beyond the largest stable sampling time.
  for (std::size_t j = 0; j < g.k.size(); ++j) {
    EXPECT_FALSE(g.stable[(g.tau.size() - 1) * g.k.size() + j]);
  }
}

TEST(Region, OverlaysAgreeWithGrid) {
  const ThetaParams th = reference_theta();
  const RegionGrid g = region_grid(th, 0.15, 5.0, 200, 0.01, 5.0, 200);
  const double dtau = g.tau[1] - g.tau[0];
  for (std::size_t j = 0; j < g.k.size(); ++j) {
    if (std::isnan(g.tau_s_of_k[j]) || g.tau_s_of_k[j] > g.tau.back()) continue;
    // Last stable row of the column sits within one cell of tau_s.
    std::size_t last = 0;
    for (std::size_t i = 0; i < g.tau.size(); ++i) {
      if (g.stable[i * g.k.size() + j]) last = i;
    }
    EXPECT_LE(std::abs(g.tau[last] - g.tau_s_of_k[j]), dtau + 1e-12) << "k=" << g.k[j];
    std::size_t arg = 0;
    for (std::size_t i = 1; i < g.tau.size(); ++i) {
      if (g.z_at(i, j) < g.z_at(arg, j)) arg = i;
    }
    EXPECT_LE(std::abs(g.tau[arg] - g.tau_o_of_k[j]), dtau + 1e-12) << "k=" << g.k[j];
  }
  const double dk = g.k[1] - g.k[0];
  for (std::size_t i = 0; i < g.tau.size(); ++i) {
    if (std::isnan(g.k_o_of_tau[i]) || g.k_o_of_tau[i] > g.k.back() ||
        g.k_o_of_tau[i] < g.k.front()) {
      continue;
    }
    std::size_t arg = 0;
    for (std::size_t j = 1; j < g.k.size(); ++j) {
      if (g.z_at(i, j) < g.z_at(i, arg)) arg = j;
    }
    EXPECT_LE(std::abs(g.k[arg] - g.k_o_of_tau[i]), dk + 1e-12) << "tau=" << g.tau[i];
  }
}

TEST(Region, ConstantReferenceShape) {
  const double mu = 0.1;
  const RegionGrid g = region_grid({mu, 0.0, 0.0, 0.0}, 0.15, 5.0, 100, 0.01, 5.0, 100);
  for (std::size_t i = 0; i < g.tau.size(); ++i) {
    for (std::size_t j = 0; j < g.k.size(); ++j) {
      const double kt = g.k[j] * g.tau[i];
      EXPECT_EQ(g.stable[i * g.k.size() + j], std::abs(1.0 - kt) + kt * kt * mu < 1.0);
    }
  }
}

TEST(Region, HugeMuLeavesNothingStable) {
  const RegionGrid g = region_grid({1e3, 0.13, 0.1, 0.2}, 0.15, 5.0, 100, 0.01, 5.0, 100);
  for (bool s : g.stable) EXPECT_FALSE(s);
}

TEST(Region, SerialAndParallelAreIdentical) {
  const RegionGrid a = region_grid(reference_theta(), 0.15, 5.0, 80, 0.01, 5.0, 60,
                                   Execution::kSerial);
  const RegionGrid b = region_grid(reference_theta(), 0.15, 5.0, 80, 0.01, 5.0, 60,
                                   Execution::kParallel);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.stable, b.stable);
}

TEST(GainForT, ReciprocalBranchOnReferenceTheta) {
  const ThetaParams th = reference_theta();
  for (double T : {0.5, 0.75, 1.5}) {
    const GainForT g = gain_for_T(th, T);
    EXPECT_EQ(g.verdict, GainForT::Verdict::kStabilizing);
    EXPECT_NEAR(g.k, 1.0 / T, 1e-12);
    EXPECT_LT(g.z, 1.0);
  }
  EXPECT_NEAR(gain_for_T(th, 0.5).z, 0.185, 1e-12);
}

TEST(GainForT, BeyondRegionHasNoGain) {
  const ThetaParams th = reference_theta();
  for (double T : {2.0, 3.0, 20.0}) {
    EXPECT_EQ(gain_for_T(th, T).verdict, GainForT::Verdict::kNoStabilizingGain);
  }
}

TEST(GainForT, SmallPeriodHitsCap) {
  const GainForT g = gain_for_T(reference_theta(), 1e-4, 1e3);
  EXPECT_EQ(g.verdict, GainForT::Verdict::kCapped);
  EXPECT_EQ(g.k, 1e3);
  EXPECT_LT(g.z, 1.0);
}

TEST(GainForT, MinimizesZOverGains) {
  std::mt19937_64 rng(500);
  for (int n = 0; n < 50; ++n) {
    const ThetaParams th = random_theta(rng);
    const double T = 0.1 + 0.2 * (n % 8);
    const GainForT g = gain_for_T(th, T);
    const double arg = grid_argmin([&](double k) { return z_of(th, k, T); }, 0.0, 2.0 / T);
    if (g.verdict == GainForT::Verdict::kNoStabilizingGain) {
      EXPECT_GE(z_of(th, arg, T), 1.0 - 1e-9);
      continue;
    }
    EXPECT_NEAR(g.k, arg, 1e-6);
  }
}

}  // namespace
}  // namespace sikm
