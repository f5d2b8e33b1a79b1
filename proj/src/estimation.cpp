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

#include "sikm/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sikm/simulation.hpp"

namespace sikm {

namespace {

using Vec4 = Eigen::Vector4d;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroError = 1e-10;

// Constraint c^T theta >= d.
struct Row {
  Vec4 c;
  double d;
  std::ptrdiff_t sample;  // -1 for the bound theta_j >= 0
};

ThetaParams to_theta(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

// Least-squares multipliers and projected direction for the active normals.
struct Projection {
  Eigen::VectorXd r;  // (N^T N)^{-1} N^T n
  Vec4 z;             // n - N r
};

Projection project(const std::vector<Row>& rows, const std::vector<int>& act,
                   const Vec4& n) {
  Projection p;
  if (act.empty()) {
    p.r.resize(0);
    p.z = n;
    return p;
  }
  Eigen::Matrix<double, 4, Eigen::Dynamic> N(4, act.size());
  for (std::size_t j = 0; j < act.size(); ++j) N.col(j) = rows[act[j]].c;
  const Eigen::MatrixXd M = N.transpose() * N;
  p.r = M.ldlt().solve(N.transpose() * n);
  p.z = n - N * p.r;
  return p;
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t cell, int run) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell),
                    static_cast<std::uint32_t>(run)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

Eigen::Vector4d EstimationSample::s() const {
  return Vec4(T * T * k * k, T, T * T * k, T * T) * e_h;
}

double EstimationSample::b() const { return std::abs(1.0 - k * T) * e_h; }

double EstimationSample::slack(const ThetaParams& th) const {
  const Vec4 v(th.mu, th.alpha, th.gamma1, th.gamma2);
  return y() - s().dot(v) - b();
}

double KktResidual::max() const {
  return std::max({stationarity, dual_feasibility, complementarity,
                   primal_feasibility});
}

EstimationResult estimate_theta(const std::vector<EstimationSample>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("estimate_theta: no samples");
  }
  std::vector<std::size_t> infeasible;
  std::vector<Row> rows;
  for (int j = 0; j < 4; ++j) rows.push_back({Vec4::Unit(j), 0.0, -1});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& smp = samples[i];
    if (!std::isfinite(smp.k) || !std::isfinite(smp.T) ||
        !std::isfinite(smp.e_h) || !std::isfinite(smp.e_h1)) {
      throw std::invalid_argument("estimate_theta: non-finite sample");
    }
    const Vec4 c = smp.s();
    const double d = smp.y() - smp.b();
    // With c >= 0 and theta >= 0, rows with d <= 0 can never bind.
    if (d <= 0.0) continue;
    if (c.maxCoeff() <= 0.0) {
      infeasible.push_back(i);
      continue;
    }
    rows.push_back({c, d, static_cast<std::ptrdiff_t>(i)});
  }
  if (!infeasible.empty()) {
    std::ostringstream os;
    os << "estimate_theta: " << infeasible.size()
       << " sample(s) have a zero regressor but y > b";
    throw InfeasibleEstimation(os.str(), infeasible);
  }

  EstimationResult res;
  res.num_samples = samples.size();
  res.screened_constraints = rows.size() - 4;

  // Goldfarb-Idnani dual active-set iteration with Hessian I, started from
  // the unconstrained minimizer theta = 0.
  Vec4 x = Vec4::Zero();
  std::vector<int> act;
  std::vector<double> u;
  const int max_iter = 50 * static_cast<int>(rows.size()) + 100;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    int p = -1;
    double worst = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const double viol =
          (rows[j].c.dot(x) - rows[j].d) / rows[j].c.norm();
      if (viol < worst) {
        worst = viol;
        p = static_cast<int>(j);
      }
    }
    if (p < 0 || worst >= -1e-14 * std::max(1.0, rows[p].d)) break;

    double u_p = 0.0;
    for (int inner = 0; inner < max_iter; ++inner) {
      const Vec4& n = rows[p].c;
      const Projection pr = project(rows, act, n);
      const double zn = pr.z.dot(n);
      const bool has_direction = pr.z.norm() > 1e-13 * n.norm();
      const double t1 =
          has_direction ? -(n.dot(x) - rows[p].d) / zn : kInf;
      double t2 = kInf;
      int l = -1;
      for (std::size_t j = 0; j < act.size(); ++j) {
        if (pr.r[j] > 0.0) {
          const double ratio = u[j] / pr.r[j];
          if (ratio < t2) {
            t2 = ratio;
            l = static_cast<int>(j);
          }
        }
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        throw InfeasibleEstimation("estimate_theta: constraints are inconsistent",
                                   {static_cast<std::size_t>(rows[p].sample)});
      }
      for (std::size_t j = 0; j < act.size(); ++j) u[j] -= t * pr.r[j];
      u_p += t;
      if (has_direction) x += t * pr.z;
      if (has_direction && t1 <= t2) {
        act.push_back(p);
        u.push_back(u_p);
        break;
      }
      act.erase(act.begin() + l);
      u.erase(u.begin() + l);
    }
  }
  res.iterations = iter;

  // Re-solve the active equalities so theta lies exactly on them.
  Eigen::VectorXd lambda(act.size());
  if (!act.empty()) {
    Eigen::Matrix<double, 4, Eigen::Dynamic> N(4, act.size());
    Eigen::VectorXd d(act.size());
    for (std::size_t j = 0; j < act.size(); ++j) {
      N.col(j) = rows[act[j]].c;
      d[j] = rows[act[j]].d;
    }
    lambda = (N.transpose() * N).ldlt().solve(d);
    x = N * lambda;
  }
  // The bounds are handled as rows, so tiny negative round-off is clipped.
  x = x.cwiseMax(0.0);
  res.theta = to_theta(x);

  Vec4 grad = x;
  for (std::size_t j = 0; j < act.size(); ++j) {
    grad -= lambda[j] * rows[act[j]].c;
    res.kkt.dual_feasibility = std::max(res.kkt.dual_feasibility, -lambda[j]);
    res.kkt.complementarity =
        std::max(res.kkt.complementarity,
                 std::abs(lambda[j] * (rows[act[j]].c.dot(x) - rows[act[j]].d)));
    if (rows[act[j]].sample >= 0) {
      res.active_samples.push_back(static_cast<std::size_t>(rows[act[j]].sample));
    }
  }
  res.kkt.stationarity = grad.cwiseAbs().maxCoeff();
  res.kkt.primal_feasibility = std::max(0.0, -x.minCoeff());
  for (const auto& smp : samples) {
    res.kkt.primal_feasibility =
        std::max(res.kkt.primal_feasibility, smp.slack(res.theta));
  }
  std::sort(res.active_samples.begin(), res.active_samples.end());
  return res;
}

SweepResult collect_samples(const SweepSpec& spec, Execution exec) {
  if (!spec.system) throw std::invalid_argument("collect_samples: no system");
  if (spec.gains.empty() || spec.periods.empty() || spec.initial_errors.empty() ||
      spec.runs_per_cell < 1 || spec.intervals < 1) {
    throw std::invalid_argument("collect_samples: empty sweep");
  }
  struct Job {
    double k, T;
    std::size_t cell, err;
    int run;
  };
  std::vector<Job> jobs;
  std::size_t cell = 0;
  for (double k : spec.gains) {
    for (double T : spec.periods) {
      for (std::size_t ie = 0; ie < spec.initial_errors.size(); ++ie, ++cell) {
        for (int r = 0; r < spec.runs_per_cell; ++r) {
          jobs.push_back({k, T, cell, ie, r});
        }
      }
    }
  }

  std::vector<std::vector<EstimationSample>> per_job(jobs.size());
  std::vector<std::optional<SweepFailure>> failed(jobs.size());
  for_each_index(jobs.size(), exec, [&](std::size_t j) {
    const Job& job = jobs[j];
    SimConfig cfg;
    cfg.system = spec.system;
    cfg.trajectory = spec.trajectory;
    cfg.strategy.kind = spec.strategy;
    cfg.strategy.gain = OfflineGain{job.k};
    cfg.strategy.T = job.T;
    cfg.dt = job.T * spec.dt_fraction;
    cfg.horizon = spec.intervals * job.T;
    cfg.initial_error = spec.initial_errors[job.err];
    cfg.noise_sigma = spec.noise_sigma;
    cfg.seed = run_seed(spec.seed, job.cell, job.run);
    SimTrace trace;
    try {
      trace = run(cfg);
    } catch (const std::exception& ex) {
      failed[j] = SweepFailure{job.k, job.T, job.err, job.run, ex.what()};
      return;
    }
    if (trace.abort) {
      failed[j] = SweepFailure{job.k, job.T, job.err, job.run,
                               trace.abort->message};
      return;
    }
    const auto idx = trace.sample_indices();
    for (std::size_t h = 0; h + 1 < idx.size(); ++h) {
      const double eh = trace.e_norm[idx[h]];
      if (eh <= kZeroError) continue;
      per_job[j].push_back({job.k, job.T, eh, trace.e_norm[idx[h + 1]]});
    }
  });

  SweepResult out;
  out.runs = jobs.size();
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (failed[j]) {
      out.failures.push_back(*failed[j]);
      continue;
    }
    out.samples.insert(out.samples.end(), per_job[j].begin(), per_job[j].end());
  }
  return out;
}

}  // namespace sikm
