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

#include "sikm/app/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sikm::app {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// JSON has no NaN or infinity; those become null.
Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : Json(nullptr);
}

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace) {
  auto out = open_out(path);
  const int n = trace.dim;
  out << "t,‖e‖,k_h,is_sample";
  for (const char* prefix : {"q_", "qr_", "u_"}) {
    for (int i = 1; i <= n; ++i) out << ',' << prefix << i;
  }
  out << '\n';
  for (std::size_t r = 0; r < trace.size(); ++r) {
    out << fmt(trace.t[r]) << ',' << fmt(trace.e_norm[r]) << ','
        << fmt(trace.k[r]) << ',' << (trace.is_sample[r] ? 1 : 0);
    for (const auto* col : {&trace.q, &trace.qr, &trace.u}) {
      for (int i = 0; i < n; ++i) out << ',' << fmt((*col)[r][i]);
    }
    out << '\n';
  }
}

Json metrics_json(const Metrics& m, const std::string& hash) {
  Json ratios = Json::array();
  for (double r : m.ratios) ratios.push_back(number(r));
  return Json{{"mean_error_norm", number(m.mean)},
              {"max_error_norm", number(m.max)},
              {"final_error_norm", number(m.final)},
              {"contraction_ratios", ratios},
              {"contraction_violations", m.violations},
              {"config_hash", hash}};
}

Json abort_json(const AbortReport& report) {
  Json q = Json::array();
  for (Eigen::Index i = 0; i < report.q.size(); ++i) q.push_back(number(report.q[i]));
  return Json{{"cause", report.cause == AbortReport::Cause::kSingularity
                            ? "singular_configuration"
                            : "infeasible_online_gain"},
              {"t", number(report.t)},
              {"configuration", q},
              {"min_singular_value", number(report.min_singular_value)},
              {"message", report.message}};
}

Json theta_json(const ThetaParams& th) {
  return Json{{"mu", th.mu},
              {"alpha", th.alpha},
              {"gamma1", th.gamma1},
              {"gamma2", th.gamma2}};
}

Json thresholds_json(const Thresholds& t) {
  return Json{{"T_max", number(t.t_max)},
              {"k_star", number(t.k_star)},
              {"tau_CR_paper", number(t.tau_cr_paper)},
              {"tau_CR_numeric", number(t.tau_cr_numeric)},
              {"k_at_tau_CR_numeric", number(t.k_at_tau_cr_numeric)},
              {"k_bar", optional_number(t.k_bar)},
              {"k_bar_formula", number(t.k_bar_formula)},
              {"k_bar_bar", optional_number(t.k_bar_bar)}};
}

Json kkt_json(const KktResidual& kkt) {
  return Json{{"stationarity", kkt.stationarity},
              {"dual_feasibility", kkt.dual_feasibility},
              {"complementarity", kkt.complementarity},
              {"primal_feasibility", kkt.primal_feasibility},
              {"max", kkt.max()}};
}

void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_region_csvs(const std::filesystem::path& dir, const RegionGrid& g) {
  {
    auto out = open_out(dir / "region.csv");
    out << "k,tau,z,stable\n";
    for (std::size_t i = 0; i < g.tau.size(); ++i) {
      for (std::size_t j = 0; j < g.k.size(); ++j) {
        const std::size_t idx = i * g.k.size() + j;
        out << fmt(g.k[j]) << ',' << fmt(g.tau[i]) << ',' << fmt(g.z[idx]) << ','
            << (g.stable[idx] ? 1 : 0) << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "region_k.csv");
    out << "k,tau_s,tau_o\n";
    for (std::size_t j = 0; j < g.k.size(); ++j) {
      out << fmt(g.k[j]) << ',' << fmt(g.tau_s_of_k[j]) << ','
          << fmt(g.tau_o_of_k[j]) << '\n';
    }
  }
  {
    auto out = open_out(dir / "region_tau.csv");
    out << "tau,k_o\n";
    for (std::size_t i = 0; i < g.tau.size(); ++i) {
      out << fmt(g.tau[i]) << ',' << fmt(g.k_o_of_tau[i]) << '\n';
    }
  }
}

void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<EstimationSample>& samples,
                       const ThetaParams& theta) {
  auto out = open_out(path);
  out << "k,T,e_h,e_h1,y,b,s_mu,s_alpha,s_gamma1,s_gamma2,slack\n";
  for (const auto& s : samples) {
    const Eigen::Vector4d reg = s.s();
    out << fmt(s.k) << ',' << fmt(s.T) << ',' << fmt(s.e_h) << ','
        << fmt(s.e_h1) << ',' << fmt(s.y()) << ',' << fmt(s.b());
    for (int i = 0; i < 4; ++i) out << ',' << fmt(reg[i]);
    out << ',' << fmt(s.slack(theta)) << '\n';
  }
}

}  // namespace sikm::app
