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

// Experiment configuration: one JSON document shared by every subcommand.
// Each subcommand reads only the sections it needs.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sikm/analysis.hpp"
#include "sikm/estimation.hpp"
#include "sikm/simulation.hpp"

namespace sikm::app {

using Json = nlohmann::json;

// Raised for unreadable, malformed or invalid configs. `field` is the JSON
// path of the offending entry when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RegionSpec {
  double k_lo = 0.15, k_hi = 5.0;
  std::size_t nk = 200;
  double tau_lo = 0.01, tau_hi = 5.0;
  std::size_t ntau = 200;
};

struct CompareSpec {
  std::vector<StrategyKind> strategies;
  // Gain settings used by the online strategies.
  OnlineGain online;
};

struct ExperimentConfig {
  Json raw;  // parsed document after command-line overrides
  std::optional<SimConfig> sim;
  std::optional<CompareSpec> compare;
  // (k, T) pairs for comparisons; SIKM-D runs with k, the others online.
  std::vector<std::pair<double, double>> pairs;
  std::optional<ThetaParams> theta;  // literal theta
  bool theta_from_sweep = false;
  std::optional<SweepSpec> sweep;
  RegionSpec region;
  std::vector<double> gain_periods;
  double gain_cap = 1e3;
  int workers = 0;
  std::uint64_t seed = 0;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

ExperimentConfig parse_config(Json doc, const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const Overrides& overrides = {});

// FNV-1a 64 over the canonical (sorted-key, compact) serialization.
std::uint64_t config_hash(const Json& doc);
std::string hash_hex(std::uint64_t h);

// Builders shared with tests.
std::shared_ptr<const SquareSystem> parse_system(const Json& j);
TrajectoryFamily parse_trajectory(const Json& j, int dim);
ControlStrategy parse_strategy(const Json& j);
OnlineGain parse_online_gain(const Json& j);
ThetaParams parse_theta(const Json& j);

}  // namespace sikm::app
