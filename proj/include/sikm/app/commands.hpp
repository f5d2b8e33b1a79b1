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

// Subcommands of the `sikm` tool. Each writes its files into `out` and
// returns a process exit code; only config problems are thrown.

#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "sikm/app/config.hpp"

namespace sikm::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitSingularity = 2,
  kExitInfeasibleEstimation = 3,
};

int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out,
                 std::ostream& log);
int cmd_compare(const ExperimentConfig& cfg, const std::filesystem::path& out,
                std::ostream& log);
int cmd_region(const ExperimentConfig& cfg, const std::filesystem::path& out,
               std::ostream& log);
int cmd_estimate(const ExperimentConfig& cfg, const std::filesystem::path& out,
                 std::ostream& log);
int cmd_gain_for_t(const ExperimentConfig& cfg, const std::filesystem::path& out,
                   std::ostream& log);

struct CompareRow {
  StrategyKind kind = StrategyKind::kSikmD;
  double T = 0.0;
  double k = 0.0;  // offline gain, or mean online gain over the run
  bool online = false;
  Metrics metrics;
  std::optional<AbortReport> abort;
};

// Runs every listed strategy at every (k, T) pair with identical system,
// trajectory, noise and seed. SIKM-D uses k; the others use `online`.
std::vector<CompareRow> run_comparison(
    const SimConfig& base, const std::vector<StrategyKind>& strategies,
    const std::vector<std::pair<double, double>>& pairs, const OnlineGain& online,
    Execution exec = Execution::kParallel);

// Parses argv and dispatches; returns the exit code.
int run_cli(int argc, char** argv);

}  // namespace sikm::app
