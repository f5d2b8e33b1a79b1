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

#include "sikm/app/config.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace sikm::app {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const Json& require(const Json& j, const std::string& key,
                    const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(join(path, key), "missing required field");
  }
  return j.at(key);
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

double get_double(const Json& j, const std::string& key, const std::string& path) {
  return as_double(require(j, key, path), join(path, key));
}

double get_double_or(const Json& j, const std::string& key,
                     const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  return as_double(j.at(key), join(path, key));
}

long long as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<long long>();
}

int get_int_or(const Json& j, const std::string& key, const std::string& path,
               int fallback) {
  if (!j.contains(key)) return fallback;
  return static_cast<int>(as_int(j.at(key), join(path, key)));
}

std::string get_string(const Json& j, const std::string& key,
                       const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

Vec as_vec(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] =
        as_double(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Vec as_vec_dim(const Json& j, const std::string& path, int dim) {
  Vec v = as_vec(j, path);
  if (v.size() != dim) {
    throw ConfigError(path, "expected " + std::to_string(dim) + " entries, got " +
                                std::to_string(v.size()));
  }
  return v;
}

std::vector<double> as_list(const Json& j, const std::string& path) {
  if (j.is_number()) return {as_double(j, path)};
  const Vec v = as_vec(j, path);
  return std::vector<double>(v.data(), v.data() + v.size());
}

StrategyKind as_strategy_kind(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a strategy name");
  const auto kind = parse_strategy_kind(j.get<std::string>());
  if (!kind) {
    throw ConfigError(path, "unknown strategy '" + j.get<std::string>() +
                                "' (expected PS, FF, SIKM-C or SIKM-D)");
  }
  return *kind;
}

void range3(const Json& j, const std::string& path, double& lo, double& hi,
            std::size_t& n) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(path, "expected [lo, hi, points]");
  }
  lo = as_double(j[0], path + "[0]");
  hi = as_double(j[1], path + "[1]");
  const long long pts = as_int(j[2], path + "[2]");
  if (!(lo > 0.0 && hi > lo) || pts < 2) {
    throw ConfigError(path, "empty range: need 0 < lo < hi and points >= 2");
  }
  n = static_cast<std::size_t>(pts);
}

SweepSpec parse_sweep(const Json& j, const std::shared_ptr<const SquareSystem>& sys,
                      const TrajectoryFamily& traj, std::uint64_t seed) {
  const std::string p = "sweep";
  SweepSpec s;
  s.system = sys;
  s.trajectory = traj;
  if (j.contains("strategy")) {
    s.strategy = as_strategy_kind(j.at("strategy"), join(p, "strategy"));
  }
  s.gains = as_list(require(j, "gains", p), join(p, "gains"));
  s.periods = as_list(require(j, "periods", p), join(p, "periods"));
  const Json& errs = require(j, "initial_errors", p);
  if (!errs.is_array() || errs.empty()) {
    throw ConfigError(join(p, "initial_errors"), "expected a nonempty array");
  }
  for (std::size_t i = 0; i < errs.size(); ++i) {
    s.initial_errors.push_back(as_vec_dim(
        errs[i], join(p, "initial_errors") + "[" + std::to_string(i) + "]",
        sys->dim()));
  }
  s.runs_per_cell = get_int_or(j, "runs_per_cell", p, 1);
  s.intervals = get_int_or(j, "intervals", p, 10);
  s.noise_sigma = get_double_or(j, "noise_sigma", p, 0.0);
  s.dt_fraction = get_double_or(j, "dt_fraction", p, 1.0 / 200.0);
  s.seed = seed;
  if (s.gains.empty() || s.periods.empty()) {
    throw ConfigError(p, "gains and periods must be nonempty");
  }
  for (double k : s.gains) {
    if (!(k > 0.0)) throw ConfigError(join(p, "gains"), "gains must be positive");
  }
  for (double T : s.periods) {
    if (!(T > 0.0)) throw ConfigError(join(p, "periods"), "periods must be positive");
  }
  if (s.runs_per_cell < 1 || s.intervals < 1) {
    throw ConfigError(p, "runs_per_cell and intervals must be >= 1");
  }
  if (!(s.noise_sigma >= 0.0)) {
    throw ConfigError(join(p, "noise_sigma"), "must be nonnegative");
  }
  if (!(s.dt_fraction > 0.0 && s.dt_fraction <= 1.0 / 50.0)) {
    throw ConfigError(join(p, "dt_fraction"), "must lie in (0, 1/50] so that dt <= T/50");
  }
  return s;
}

}  // namespace

ConfigError::ConfigError(const std::string& field, const std::string& what)
    : std::runtime_error(field.empty() ? what : field + ": " + what),
      field_(field) {}

std::shared_ptr<const SquareSystem> parse_system(const Json& j) {
  const std::string p = "system";
  const std::string id = get_string(j, "id", p);
  try {
    if (id == "planar_formation") {
      if (!j.contains("fixed_angles")) return std::make_shared<PlanarFormation>();
      const Vec a = as_vec_dim(j.at("fixed_angles"), join(p, "fixed_angles"), 3);
      return std::make_shared<PlanarFormation>(
          std::array<double, 3>{a[0], a[1], a[2]});
    }
    if (id == "scalar") {
      return std::make_shared<ScalarSystem>(get_double_or(j, "amplitude", p, 0.5));
    }
    if (id == "constant_jacobian") {
      const bool single = j.value("single_robot_layout", false);
      if (j.contains("identity")) {
        const long long n = as_int(j.at("identity"), join(p, "identity"));
        if (n < 1) throw ConfigError(join(p, "identity"), "dimension must be >= 1");
        return std::make_shared<ConstantJacobianSystem>(
            Mat::Identity(n, n), single);
      }
      const Json& m = require(j, "matrix", p);
      if (!m.is_array() || m.empty()) {
        throw ConfigError(join(p, "matrix"), "expected a square array of rows");
      }
      const auto n = static_cast<Eigen::Index>(m.size());
      Mat a(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        a.row(r) = as_vec_dim(m[r], join(p, "matrix") + "[" + std::to_string(r) + "]",
                              static_cast<int>(n))
                       .transpose();
      }
      return std::make_shared<ConstantJacobianSystem>(a, single);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(p, e.what());
  }
  throw ConfigError(join(p, "id"),
                    "unknown system '" + id +
                        "' (expected planar_formation, scalar or constant_jacobian)");
}

TrajectoryFamily parse_trajectory(const Json& j, int dim) {
  const std::string p = "trajectory";
  const std::string kind = get_string(j, "kind", p);
  TrajectoryFamily fam;
  if (kind == "constant") {
    fam.duration = get_double(j, "duration", p);
    fam.shape = ConstantSpec{as_vec_dim(require(j, "value", p), join(p, "value"), dim)};
  } else if (kind == "sinusoidal") {
    fam.duration = get_double(j, "duration", p);
    SinusoidalSpec s;
    s.offset = as_vec_dim(require(j, "offset", p), join(p, "offset"), dim);
    s.amplitude = as_vec_dim(require(j, "amplitude", p), join(p, "amplitude"), dim);
    s.omega = as_vec_dim(require(j, "omega", p), join(p, "omega"), dim);
    s.phase = j.contains("phase") ? as_vec_dim(j.at("phase"), join(p, "phase"), dim)
                                  : Vec::Zero(dim);
    fam.shape = s;
  } else if (kind == "waypoint") {
    WaypointSpec w;
    const Json& pts = require(j, "waypoints", p);
    if (!pts.is_array()) throw ConfigError(join(p, "waypoints"), "expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      w.waypoints.push_back(as_vec_dim(
          pts[i], join(p, "waypoints") + "[" + std::to_string(i) + "]", dim));
    }
    w.segment_durations =
        as_list(require(j, "segment_durations", p), join(p, "segment_durations"));
    fam.duration = std::accumulate(w.segment_durations.begin(),
                                   w.segment_durations.end(), 0.0);
    fam.shape = w;
  } else if (kind == "preset") {
    const std::string name = get_string(j, "name", p);
    if (name != "planar_stress") {
      throw ConfigError(join(p, "name"), "unknown preset '" + name + "'");
    }
    if (dim != 6) {
      throw ConfigError(join(p, "name"), "planar_stress needs a 6-dimensional system");
    }
    fam = planar_stress_preset(get_double(j, "duration", p),
                               get_double_or(j, "speed_scale", p, 1.0));
  } else {
    throw ConfigError(join(p, "kind"),
                      "unknown trajectory kind '" + kind +
                          "' (expected constant, sinusoidal, waypoint or preset)");
  }
  try {
    (void)make_trajectory(fam, dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(p, e.what());
  }
  return fam;
}

OnlineGain parse_online_gain(const Json& j) {
  const std::string p = "online";
  OnlineGain g;
  if (!j.is_object()) throw ConfigError(p, "expected an object");
  g.search.k_min = get_double_or(j, "k_min", p, g.search.k_min);
  if (j.contains("k_max")) g.search.k_max = get_double(j, "k_max", p);
  g.search.grid_points = get_int_or(j, "grid_points", p, g.search.grid_points);
  g.search.refine_iters = get_int_or(j, "refine_iters", p, g.search.refine_iters);
  g.search.prediction_steps =
      get_int_or(j, "prediction_steps", p, g.search.prediction_steps);
  if (j.contains("mode")) {
    const std::string mode = get_string(j, "mode", p);
    if (mode == "error_flow") {
      g.mode = OnlineMode::kErrorFlow;
    } else if (mode == "auxiliary") {
      g.mode = OnlineMode::kAuxiliary;
    } else {
      throw ConfigError(join(p, "mode"), "expected error_flow or auxiliary");
    }
  }
  g.aux_horizon = get_double_or(j, "aux_horizon", p, g.aux_horizon);
  g.aux_dt = get_double_or(j, "aux_dt", p, g.aux_dt);
  return g;
}

ControlStrategy parse_strategy(const Json& j) {
  const std::string p = "strategy";
  ControlStrategy s;
  s.kind = as_strategy_kind(require(j, "kind", p), join(p, "kind"));
  s.T = get_double(j, "T", p);
  if (j.contains("k")) {
    s.gain = OfflineGain{get_double(j, "k", p)};
  } else if (j.contains("online")) {
    s.gain = parse_online_gain(j.at("online"));
  } else if (s.kind == StrategyKind::kSikmD) {
    throw ConfigError(join(p, "k"), "SIKM-D needs an offline gain k");
  } else {
    s.gain = OnlineGain{};
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(p, e.what());
  }
  return s;
}

ThetaParams parse_theta(const Json& j) {
  const std::string p = "theta";
  ThetaParams th{get_double(j, "mu", p), get_double(j, "alpha", p),
                 get_double(j, "gamma1", p), get_double(j, "gamma2", p)};
  if (!th.valid()) throw ConfigError(p, "components must be finite and >= 0");
  return th;
}

ExperimentConfig parse_config(Json doc, const Overrides& overrides) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.workers) doc["workers"] = *overrides.workers;

  ExperimentConfig cfg;
  if (doc.contains("seed")) {
    const Json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.workers = get_int_or(doc, "workers", "", 0);
  if (cfg.workers < 0) throw ConfigError("workers", "must be >= 0");

  std::shared_ptr<const SquareSystem> sys;
  std::optional<TrajectoryFamily> traj;
  if (doc.contains("system")) sys = parse_system(doc.at("system"));
  if (doc.contains("trajectory")) {
    if (!sys) throw ConfigError("system", "a trajectory needs a system");
    traj = parse_trajectory(doc.at("trajectory"), sys->dim());
  }

  if (sys && traj) {
    SimConfig sim;
    sim.system = sys;
    sim.trajectory = *traj;
    sim.horizon = get_double_or(doc, "horizon", "", traj->duration);
    if (doc.contains("dt")) sim.dt = get_double(doc, "dt", "");
    sim.initial_error = doc.contains("initial_error")
                            ? as_vec_dim(doc.at("initial_error"), "initial_error",
                                         sys->dim())
                            : Vec::Zero(sys->dim());
    sim.noise_sigma = get_double_or(doc, "noise_sigma", "", 0.0);
    sim.seed = cfg.seed;
    if (doc.contains("guard")) {
      sim.guard.min_singular_value_threshold = get_double_or(
          doc.at("guard"), "min_singular_value", "guard",
          sim.guard.min_singular_value_threshold);
    }
    if (doc.contains("strategy")) {
      sim.strategy = parse_strategy(doc.at("strategy"));
      try {
        sim.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
      }
    }
    cfg.sim = sim;
  }

  if (doc.contains("theta")) {
    const Json& t = doc.at("theta");
    if (t.is_string() && t.get<std::string>() == "estimate") {
      cfg.theta_from_sweep = true;
    } else {
      cfg.theta = parse_theta(t);
    }
  }

  if (doc.contains("compare")) {
    const Json& c = doc.at("compare");
    CompareSpec spec;
    const Json& names = require(c, "strategies", "compare");
    if (!names.is_array()) {
      throw ConfigError("compare.strategies", "expected an array of names");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      spec.strategies.push_back(as_strategy_kind(
          names[i], "compare.strategies[" + std::to_string(i) + "]"));
    }
    if (c.contains("online")) spec.online = parse_online_gain(c.at("online"));
    cfg.compare = spec;
  }

  if (doc.contains("pairs")) {
    const Json& pairs = doc.at("pairs");
    if (!pairs.is_array()) throw ConfigError("pairs", "expected an array");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string p = "pairs[" + std::to_string(i) + "]";
      const Json& e = pairs[i];
      if (e.is_array() && e.size() == 2) {
        cfg.pairs.emplace_back(as_double(e[0], p + "[0]"), as_double(e[1], p + "[1]"));
      } else if (e.is_object()) {
        // {"T": x}: the gain is read off the optimal-gain curve of theta.
        const double T = get_double(e, "T", p);
        if (!cfg.theta) throw ConfigError(p, "a T-only pair needs a literal theta");
        const GainForT g = gain_for_T(*cfg.theta, T);
        if (g.verdict == GainForT::Verdict::kNoStabilizingGain) {
          throw ConfigError(p, "theta admits no stabilizing gain at this T");
        }
        cfg.pairs.emplace_back(g.k, T);
      } else {
        throw ConfigError(p, "expected [k, T] or {\"T\": value}");
      }
      if (!(cfg.pairs.back().first > 0.0 && cfg.pairs.back().second > 0.0)) {
        throw ConfigError(p, "k and T must be positive");
      }
    }
  }

  if (doc.contains("sweep")) {
    if (!sys || !traj) {
      throw ConfigError("sweep", "a sweep needs a system and a trajectory");
    }
    cfg.sweep = parse_sweep(doc.at("sweep"), sys, *traj, cfg.seed);
  }
  if (cfg.theta_from_sweep && !cfg.sweep) {
    throw ConfigError("theta", "\"estimate\" needs a sweep section");
  }

  if (doc.contains("region")) {
    const Json& r = doc.at("region");
    if (r.contains("k")) {
      range3(r.at("k"), "region.k", cfg.region.k_lo, cfg.region.k_hi, cfg.region.nk);
    }
    if (r.contains("tau")) {
      range3(r.at("tau"), "region.tau", cfg.region.tau_lo, cfg.region.tau_hi,
             cfg.region.ntau);
    }
  }

  if (doc.contains("gain_for_t")) {
    const Json& g = doc.at("gain_for_t");
    cfg.gain_periods = as_list(require(g, "T", "gain_for_t"), "gain_for_t.T");
    cfg.gain_cap = get_double_or(g, "k_cap", "gain_for_t", cfg.gain_cap);
    for (double T : cfg.gain_periods) {
      if (!(T > 0.0)) throw ConfigError("gain_for_t.T", "periods must be positive");
    }
    if (!(cfg.gain_cap > 0.0)) throw ConfigError("gain_for_t.k_cap", "must be positive");
  }

  cfg.raw = std::move(doc);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", "JSON parse error in " + path.string() + ": " + e.what());
  }
  return parse_config(std::move(doc), overrides);
}

std::uint64_t config_hash(const Json& doc) {
  Json copy = doc;
  // Worker count never changes results.
  if (copy.is_object()) copy.erase("workers");
  const std::string text = copy.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sikm::app
