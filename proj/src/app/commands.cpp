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

#include "sikm/app/commands.hpp"

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sikm/app/io.hpp"

namespace sikm::app {

namespace fs = std::filesystem;

namespace {

Execution exec_for(const ExperimentConfig& cfg) {
  return cfg.workers == 1 ? Execution::kSerial : Execution::kParallel;
}

const SimConfig& require_sim(const ExperimentConfig& cfg, bool need_strategy) {
  if (!cfg.sim) {
    throw ConfigError("system", "this command needs a system and a trajectory");
  }
  if (need_strategy && !cfg.raw.contains("strategy")) {
    throw ConfigError("strategy", "missing required field");
  }
  return *cfg.sim;
}

struct ThetaOutcome {
  std::optional<ThetaParams> theta;
  int exit_code = kExitOk;
};

// Estimates theta from the sweep and writes the estimation files.
ThetaOutcome estimate_into(const ExperimentConfig& cfg, const fs::path& out,
                           std::ostream& log) {
  const SweepResult sweep = collect_samples(*cfg.sweep, exec_for(cfg));
  Json failures = Json::array();
  for (const auto& f : sweep.failures) {
    failures.push_back(Json{{"k", f.k},
                            {"T", f.T},
                            {"initial_error", f.initial_error},
                            {"run", f.run},
                            {"message", f.message}});
  }
  Json report{{"runs", sweep.runs},
              {"failed_runs", failures},
              {"num_samples", sweep.samples.size()},
              {"config_hash", hash_hex(config_hash(cfg.raw))}};
  if (sweep.samples.empty()) {
    report["error"] = "no samples: every run failed or stayed at zero error";
    write_json(out / "theta.json", report);
    log << "estimate: no samples collected\n";
    return {std::nullopt, kExitInfeasibleEstimation};
  }
  try {
    const EstimationResult est = estimate_theta(sweep.samples);
    report["theta"] = theta_json(est.theta);
    report["kkt_residual"] = kkt_json(est.kkt);
    report["screened_constraints"] = est.screened_constraints;
    report["active_samples"] = est.active_samples;
    report["iterations"] = est.iterations;
    write_json(out / "theta.json", report);
    write_samples_csv(out / "samples.csv", sweep.samples, est.theta);
    log << "estimate: theta = (" << fmt(est.theta.mu) << ", "
        << fmt(est.theta.alpha) << ", " << fmt(est.theta.gamma1) << ", "
        << fmt(est.theta.gamma2) << ") from " << sweep.samples.size()
        << " samples, KKT residual " << fmt(est.kkt.max()) << "\n";
    return {est.theta, kExitOk};
  } catch (const InfeasibleEstimation& e) {
    report["error"] = e.what();
    report["infeasible_samples"] = e.indices();
    write_json(out / "theta.json", report);
    log << "estimate: " << e.what() << "\n";
    return {std::nullopt, kExitInfeasibleEstimation};
  }
}

ThetaOutcome resolve_theta(const ExperimentConfig& cfg, const fs::path& out,
                           std::ostream& log) {
  if (cfg.theta) return {cfg.theta, kExitOk};
  if (cfg.theta_from_sweep) return estimate_into(cfg, out, log);
  throw ConfigError("theta", "missing required field");
}

std::string verdict_name(GainForT::Verdict v) {
  switch (v) {
    case GainForT::Verdict::kStabilizing:
      return "stabilizing";
    case GainForT::Verdict::kCapped:
      return "stabilizing_at_cap";
    case GainForT::Verdict::kNoStabilizingGain:
      return "no_stabilizing_gain";
  }
  return "?";
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg, const fs::path& out,
                 std::ostream& log) {
  SimConfig sim = require_sim(cfg, true);
  sim.gain_exec = exec_for(cfg);
  const SimTrace trace = run(sim);
  const std::string hash = hash_hex(config_hash(cfg.raw));
  write_trace_csv(out / "trace.csv", trace);
  if (trace.size() > 0) {
    write_json(out / "metrics.json", metrics_json(compute_metrics(trace), hash));
  }
  if (trace.abort) {
    write_json(out / "abort.json", abort_json(*trace.abort));
    log << "simulate: aborted at t = " << fmt(trace.abort->t) << ": "
        << trace.abort->message << "\n";
    return kExitSingularity;
  }
  log << "simulate: " << trace.size() << " trace points written to "
      << (out / "trace.csv").string() << "\n";
  return kExitOk;
}

std::vector<CompareRow> run_comparison(
    const SimConfig& base, const std::vector<StrategyKind>& strategies,
    const std::vector<std::pair<double, double>>& pairs, const OnlineGain& online,
    Execution exec) {
  std::vector<SimConfig> configs;
  std::vector<CompareRow> rows;
  for (const auto& [k, T] : pairs) {
    for (StrategyKind kind : strategies) {
      SimConfig c = base;
      c.gain_exec = Execution::kSerial;
      c.strategy.kind = kind;
      c.strategy.T = T;
      if (kind == StrategyKind::kSikmD) {
        c.strategy.gain = OfflineGain{k};
      } else {
        c.strategy.gain = online;
      }
      configs.push_back(std::move(c));
      CompareRow row;
      row.kind = kind;
      row.T = T;
      row.k = k;
      row.online = kind != StrategyKind::kSikmD;
      rows.push_back(row);
    }
  }
  const std::vector<SimTrace> traces = run_batch(configs, exec);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SimTrace& tr = traces[i];
    rows[i].abort = tr.abort;
    if (tr.size() > 0) rows[i].metrics = compute_metrics(tr);
    if (rows[i].online) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t j : tr.sample_indices()) {
        sum += tr.k[j];
        ++count;
      }
      rows[i].k = count > 0 ? sum / count : 0.0;
    }
  }
  return rows;
}

int cmd_compare(const ExperimentConfig& cfg, const fs::path& out,
                std::ostream& log) {
  const SimConfig& base = require_sim(cfg, false);
  if (!cfg.compare) throw ConfigError("compare", "missing required field");
  if (cfg.compare->strategies.size() < 2) {
    throw ConfigError("compare.strategies", "list at least two strategies");
  }
  std::vector<std::pair<double, double>> pairs = cfg.pairs;
  if (pairs.empty()) {
    if (!cfg.raw.contains("strategy")) {
      throw ConfigError("pairs", "give (k, T) pairs or a strategy with T and k");
    }
    const auto* off = std::get_if<OfflineGain>(&base.strategy.gain);
    if (off == nullptr) {
      throw ConfigError("strategy.k", "the comparison needs an offline gain");
    }
    pairs.emplace_back(off->k, base.strategy.T);
  }
  // Every run must validate before anything is simulated.
  for (const auto& [k, T] : pairs) {
    SimConfig probe = base;
    probe.strategy.T = T;
    probe.strategy.gain = OfflineGain{k};
    try {
      probe.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("pairs", e.what());
    }
  }

  const auto rows = run_comparison(base, cfg.compare->strategies, pairs,
                                   cfg.compare->online, exec_for(cfg));
  Json shared = cfg.raw;
  for (const char* key : {"strategy", "compare", "pairs"}) shared.erase(key);
  const std::string hash = hash_hex(config_hash(shared));

  std::ofstream csv(out / "compare.csv");
  if (!csv) throw std::runtime_error("cannot write compare.csv");
  csv << "strategy,T,k,gain_source,mean_error_norm,max_error_norm,"
         "final_error_norm,contraction_violations,completed,config_hash\n";
  Json table = Json::array();
  bool aborted = false;
  for (const auto& r : rows) {
    aborted = aborted || r.abort.has_value();
    const std::string name(to_string(r.kind));
    csv << name << ',' << fmt(r.T) << ',' << fmt(r.k) << ','
        << (r.online ? "online_mean" : "offline") << ',' << fmt(r.metrics.mean)
        << ',' << fmt(r.metrics.max) << ',' << fmt(r.metrics.final) << ','
        << r.metrics.violations << ',' << (r.abort ? 0 : 1) << ',' << hash << '\n';
    Json row{{"strategy", name}, {"T", r.T}, {"k", r.k},
             {"gain_source", r.online ? "online_mean" : "offline"},
             {"metrics", metrics_json(r.metrics, hash)}};
    if (r.abort) row["abort"] = abort_json(*r.abort);
    table.push_back(row);
    log << "compare: " << name << " T=" << fmt(r.T) << " mean ‖e‖ = "
        << fmt(r.metrics.mean) << (r.abort ? " (aborted)" : "") << "\n";
  }
  write_json(out / "compare.json", Json{{"rows", table}, {"config_hash", hash}});
  return aborted ? kExitSingularity : kExitOk;
}

int cmd_region(const ExperimentConfig& cfg, const fs::path& out,
               std::ostream& log) {
  const ThetaOutcome th = resolve_theta(cfg, out, log);
  if (!th.theta) return th.exit_code;
  const RegionSpec& r = cfg.region;
  const RegionGrid grid = region_grid(*th.theta, r.k_lo, r.k_hi, r.nk, r.tau_lo,
                                      r.tau_hi, r.ntau, exec_for(cfg));
  write_region_csvs(out, grid);
  Json doc{{"theta", theta_json(*th.theta)},
           {"config_hash", hash_hex(config_hash(cfg.raw))}};
  if (th.theta->valid_for_formulas()) {
    doc["thresholds"] = thresholds_json(thresholds(*th.theta));
  } else {
    doc["thresholds"] = Json{{"T_max", th.theta->alpha > 0.0
                                           ? Json(2.0 / th.theta->alpha)
                                           : Json(nullptr)}};
    doc["note"] = "closed-form thresholds need mu > 0 and gamma2 > 0";
  }
  write_json(out / "thresholds.json", doc);
  std::size_t stable = 0;
  for (bool s : grid.stable) stable += s ? 1 : 0;
  log << "region: " << stable << " of " << grid.stable.size()
      << " grid cells stable\n";
  return kExitOk;
}

int cmd_estimate(const ExperimentConfig& cfg, const fs::path& out,
                 std::ostream& log) {
  if (!cfg.sweep) throw ConfigError("sweep", "missing required field");
  return estimate_into(cfg, out, log).exit_code;
}

int cmd_gain_for_t(const ExperimentConfig& cfg, const fs::path& out,
                   std::ostream& log) {
  if (cfg.gain_periods.empty()) {
    throw ConfigError("gain_for_t.T", "missing required field");
  }
  const ThetaOutcome th = resolve_theta(cfg, out, log);
  if (!th.theta) return th.exit_code;
  if (!th.theta->valid_for_formulas()) {
    throw ConfigError("theta", "gain selection needs mu > 0 and gamma2 > 0");
  }
  std::ofstream csv(out / "gain_for_t.csv");
  if (!csv) throw std::runtime_error("cannot write gain_for_t.csv");
  csv << "T,k,z,verdict\n";
  Json rows = Json::array();
  for (double T : cfg.gain_periods) {
    const GainForT g = gain_for_T(*th.theta, T, cfg.gain_cap);
    const std::string v = verdict_name(g.verdict);
    csv << fmt(T) << ',' << fmt(g.k) << ',' << fmt(g.z) << ',' << v << '\n';
    rows.push_back(Json{{"T", T}, {"k", g.k}, {"z", g.z}, {"verdict", v}});
    log << "gain-for-t: T = " << fmt(T) << " -> k = " << fmt(g.k) << " (" << v
        << ", z = " << fmt(g.z) << ")\n";
  }
  write_json(out / "gain_for_t.json",
             Json{{"theta", theta_json(*th.theta)},
                  {"rows", rows},
                  {"config_hash", hash_hex(config_hash(cfg.raw))}});
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Sampled inverse-kinematics tracking: simulation and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;

  using Command = int (*)(const ExperimentConfig&, const fs::path&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"simulate", "Run one closed-loop simulation", cmd_simulate},
      {"compare", "Compare strategies on shared conditions", cmd_compare},
      {"region", "Stability region, overlays and thresholds", cmd_region},
      {"estimate", "Estimate theta from a simulation sweep", cmd_estimate},
      {"gain-for-t", "Optimal gain for given sampling periods", cmd_gain_for_t},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--workers", workers, "Upper bound on worker threads")
        ->check(CLI::NonNegativeNumber);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    const ExperimentConfig cfg = load_config(config_path, Overrides{seed, workers});
    set_workers(cfg.workers);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
      throw ConfigError("--out", "cannot create output directory " + out_dir);
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return std::get<2>(commands[i])(cfg, out_dir, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace sikm::app
