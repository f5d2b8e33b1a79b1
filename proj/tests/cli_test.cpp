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


#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sikm/app/commands.hpp"

namespace sikm::app {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("sikm_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const Json& doc) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  int cli(std::vector<std::string> args) const {
    args.insert(args.begin(), "sikm");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  }

  int cmd(const std::string& sub, const fs::path& config, const fs::path& out,
          std::vector<std::string> extra = {}) const {
    std::vector<std::string> args{sub, "--config", config.string(), "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Json scalar_sim() {
  return Json::parse(R"({
    "system": {"id": "scalar"},
    "trajectory": {"kind": "sinusoidal", "duration": 5.0, "offset": [0.1],
                   "amplitude": [0.3], "omega": [1.0]},
    "strategy": {"kind": "SIKM-D", "T": 0.5, "k": 1.0},
    "initial_error": [0.2],
    "noise_sigma": 0.01,
    "seed": 3
  })");
}

Json reference_theta() {
  return Json::parse(R"({"mu": 0.02, "alpha": 0.13, "gamma1": 0.1, "gamma2": 0.2})");
}

TEST_F(CliTest, SimulateWritesDeterministicFiles) {
  const auto cfg = write_config("sim.json", scalar_sim());
  ASSERT_EQ(cmd("simulate", cfg, dir_ / "a"), kExitOk);
  ASSERT_EQ(cmd("simulate", cfg, dir_ / "b", {"--workers", "1"}), kExitOk);
  for (const char* f : {"trace.csv", "metrics.json"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  const auto rows = read_csv(dir_ / "a" / "trace.csv");
  EXPECT_EQ(rows[0].size(), 7u);
  EXPECT_EQ(rows[0][1], "‖e‖");
  EXPECT_EQ(rows.size(), 1u + 10u * 200u + 1u);
  const Json m = read_json(dir_ / "a" / "metrics.json");
  EXPECT_GT(m["mean_error_norm"].get<double>(), 0.0);
  EXPECT_EQ(m["contraction_ratios"].size(), 10u);
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
}

TEST_F(CliTest, SeedOverrideChangesNoisyRun) {
  const auto cfg = write_config("sim.json", scalar_sim());
  ASSERT_EQ(cmd("simulate", cfg, dir_ / "a"), kExitOk);
  ASSERT_EQ(cmd("simulate", cfg, dir_ / "b", {"--seed", "4"}), kExitOk);
  EXPECT_NE(slurp(dir_ / "a" / "trace.csv"), slurp(dir_ / "b" / "trace.csv"));
}

TEST_F(CliTest, SimulateRejectsCoarseSubstep) {
  Json d = scalar_sim();
  d["dt"] = 0.02;
  EXPECT_EQ(cmd("simulate", write_config("sim.json", d), dir_ / "o"), kExitConfigError);
}

TEST_F(CliTest, SimulateReportsSingularity) {
  const Json d = Json::parse(R"({
    "system": {"id": "planar_formation"},
    "trajectory": {"kind": "constant", "duration": 2.0, "value": [0, 0, 0, 1, 1, 1]},
    "strategy": {"kind": "SIKM-D", "T": 0.5, "k": 1.0},
    "initial_error": [0, 0, 0, 0, 0, -3]
  })");
  EXPECT_EQ(cmd("simulate", write_config("sim.json", d), dir_ / "o"), kExitSingularity);
  const Json a = read_json(dir_ / "o" / "abort.json");
  EXPECT_EQ(a["cause"], "singular_configuration");
  EXPECT_EQ(a["configuration"].size(), 6u);
}

TEST_F(CliTest, TableTwoStyleSimulation) {
  const Json d = Json::parse(R"({
    "system": {"id": "planar_formation"},
    "trajectory": {"kind": "preset", "name": "planar_stress", "duration": 15.0,
                   "speed_scale": 0.2},
    "strategy": {"kind": "SIKM-D", "T": 0.75, "k": 1.28},
    "initial_error": [0.05, -0.05, 0.05, 0.1, -0.1, 0.05]
  })");
  ASSERT_EQ(cmd("simulate", write_config("sim.json", d), dir_ / "o"), kExitOk);
  const Json m = read_json(dir_ / "o" / "metrics.json");
  EXPECT_TRUE(m.contains("mean_error_norm"));
  EXPECT_LT(m["final_error_norm"].get<double>(), m["max_error_norm"].get<double>());
}

Json planar_compare(double T, double horizon) {
  Json d = Json::parse(R"({
    "system": {"id": "planar_formation"},
    "trajectory": {"kind": "preset", "name": "planar_stress", "speed_scale": 0.2},
    "compare": {"strategies": ["PS", "FF", "SIKM-C", "SIKM-D"]},
    "initial_error": [0.05, -0.05, 0.05, 0.1, -0.1, 0.05]
  })");
  d["trajectory"]["duration"] = horizon;
  d["pairs"] = Json::array({Json::array({1.0 / T, T})});
  return d;
}

TEST_F(CliTest, CompareRanksProportionalLast) {
  const auto cfg = write_config("cmp.json", planar_compare(1.5, 15.0));
  ASSERT_EQ(cmd("compare", cfg, dir_ / "o"), kExitOk);
  const auto rows = read_csv(dir_ / "o" / "compare.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0][0], "strategy");
  double ps = 0.0, others = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].back(), rows[1].back());  // shared config hash
    const double mean = std::stod(rows[i][4]);
    if (rows[i][0] == "PS") {
      ps = mean;
    } else {
      others = std::max(others, mean);
    }
  }
  EXPECT_GT(ps, others);
}

TEST_F(CliTest, CompareCentralizedAndDistributedAtSmallPeriod) {
  Json d = planar_compare(0.1, 5.0);
  d["compare"]["strategies"] = Json::array({"SIKM-C", "SIKM-D"});
  ASSERT_EQ(cmd("compare", write_config("cmp.json", d), dir_ / "o"), kExitOk);
  const auto rows = read_csv(dir_ / "o" / "compare.csv");
  ASSERT_EQ(rows.size(), 3u);
  const double c = std::stod(rows[1][4]), dd = std::stod(rows[2][4]);
  EXPECT_LE(std::max(c, dd) / std::min(c, dd), 1.2);
}

TEST_F(CliTest, CompareNeedsTwoStrategies) {
  Json d = planar_compare(1.5, 15.0);
  d["compare"]["strategies"] = Json::array({"SIKM-D"});
  EXPECT_EQ(cmd("compare", write_config("cmp.json", d), dir_ / "o"), kExitConfigError);
}

TEST_F(CliTest, RegionWritesGridAndThresholds) {
  Json d;
  d["theta"] = reference_theta();
  d["region"] = Json::parse(R"({"k": [0.15, 5.0, 40], "tau": [0.01, 5.0, 30]})");
  ASSERT_EQ(cmd("region", write_config("r.json", d), dir_ / "o"), kExitOk);
  const Json t = read_json(dir_ / "o" / "thresholds.json");
  EXPECT_NEAR(t["thresholds"]["T_max"].get<double>(), 15.385, 1e-3);
  EXPECT_NEAR(t["thresholds"]["tau_CR_paper"].get<double>(), 4.240, 1e-3);
  const auto grid = read_csv(dir_ / "o" / "region.csv");
  EXPECT_EQ(grid[0], (std::vector<std::string>{"k", "tau", "z", "stable"}));
  EXPECT_EQ(grid.size(), 1u + 40u * 30u);
  EXPECT_EQ(read_csv(dir_ / "o" / "region_k.csv")[0],
            (std::vector<std::string>{"k", "tau_s", "tau_o"}));
  EXPECT_EQ(read_csv(dir_ / "o" / "region_tau.csv")[0],
            (std::vector<std::string>{"tau", "k_o"}));
}

TEST_F(CliTest, RegionWithLargeMuHasSingleBranch) {
  Json d;
  d["theta"] = Json::parse(R"({"mu": 1.5, "alpha": 0.1, "gamma1": 0.2, "gamma2": 0.3})");
  ASSERT_EQ(cmd("region", write_config("r.json", d), dir_ / "o"), kExitOk);
  const Json t = read_json(dir_ / "o" / "thresholds.json");
  EXPECT_TRUE(t["thresholds"]["k_bar"].is_null());
}

TEST_F(CliTest, RegionRejectsEmptyRange) {
  Json d;
  d["theta"] = reference_theta();
  d["region"] = Json::parse(R"({"k": [1.0, 0.5, 10]})");
  EXPECT_EQ(cmd("region", write_config("r.json", d), dir_ / "o"), kExitConfigError);
}

Json identity_sweep() {
  return Json::parse(R"({
    "system": {"id": "constant_jacobian", "identity": 2},
    "trajectory": {"kind": "constant", "duration": 50.0, "value": [0, 0]},
    "sweep": {"strategy": "PS", "gains": [0.5, 1.0], "periods": [0.3, 0.6],
              "initial_errors": [[0.2, -0.1], [0.05, 0.3]], "intervals": 6}
  })");
}

TEST_F(CliTest, EstimateLinearSweepGivesZeroTheta) {
  ASSERT_EQ(cmd("estimate", write_config("e.json", identity_sweep()), dir_ / "o"), kExitOk);
  const Json t = read_json(dir_ / "o" / "theta.json");
  for (const char* c : {"mu", "alpha", "gamma1", "gamma2"}) {
    EXPECT_LT(t["theta"][c].get<double>(), 1e-9) << c;
  }
  EXPECT_EQ(t["num_samples"], 48);
  const auto rows = read_csv(dir_ / "o" / "samples.csv");
  ASSERT_EQ(rows.size(), 49u);
  EXPECT_EQ(rows[0].back(), "slack");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i].back()), 1e-9);
}

TEST_F(CliTest, EstimatePlanarSweepFindsPositiveAlpha) {
  const Json d = Json::parse(R"({
    "system": {"id": "planar_formation"},
    "trajectory": {"kind": "preset", "name": "planar_stress", "duration": 40.0, "speed_scale": 0.3},
    "sweep": {"gains": [0.6, 1.2, 1.8], "periods": [0.25, 0.5, 0.75],
              "initial_errors": [[0.05, -0.05, 0.05, 0.1, -0.1, 0.05]], "intervals": 8},
    "seed": 5
  })");
  ASSERT_EQ(cmd("estimate", write_config("e.json", d), dir_ / "o"), kExitOk);
  const Json t = read_json(dir_ / "o" / "theta.json");
  EXPECT_GT(t["theta"]["alpha"].get<double>(), 0.0);
  EXPECT_LE(t["kkt_residual"]["max"].get<double>(), 1e-8);
}

TEST_F(CliTest, EstimateWithoutSamplesFails) {
  Json d = identity_sweep();
  d["sweep"]["initial_errors"] = Json::parse("[[0, 0]]");
  EXPECT_EQ(cmd("estimate", write_config("e.json", d), dir_ / "o"),
            kExitInfeasibleEstimation);
  const Json t = read_json(dir_ / "o" / "theta.json");
  EXPECT_NE(t["error"].get<std::string>().find("no samples"), std::string::npos);
}

TEST_F(CliTest, RegionFromEstimatedTheta) {
  Json d = identity_sweep();
  d["theta"] = "estimate";
  d["region"] = Json::parse(R"({"k": [0.15, 5.0, 20], "tau": [0.01, 5.0, 20]})");
  ASSERT_EQ(cmd("region", write_config("r.json", d), dir_ / "o"), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "theta.json"));
  EXPECT_TRUE(fs::exists(dir_ / "o" / "region.csv"));
}

TEST_F(CliTest, GainForPeriods) {
  Json d;
  d["theta"] = reference_theta();
  d["gain_for_t"] = Json::parse(R"({"T": [0.5, 0.75, 1.5, 20.0, 0.0001]})");
  ASSERT_EQ(cmd("gain-for-t", write_config("g.json", d), dir_ / "o"), kExitOk);
  const Json g = read_json(dir_ / "o" / "gain_for_t.json");
  ASSERT_EQ(g["rows"].size(), 5u);
  EXPECT_NEAR(g["rows"][0]["k"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(g["rows"][1]["k"].get<double>(), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(g["rows"][2]["k"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(g["rows"][3]["verdict"], "no_stabilizing_gain");
  EXPECT_EQ(g["rows"][4]["verdict"], "stabilizing_at_cap");
  EXPECT_LT(g["rows"][4]["z"].get<double>(), 1.0);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "gain_for_t.csv"));
}

TEST_F(CliTest, ArgumentErrors) {
  EXPECT_EQ(cli({}), kExitConfigError);
  EXPECT_EQ(cli({"simulate", "--out", dir_.string()}), kExitConfigError);
  EXPECT_EQ(cli({"simulate", "--config", "/nonexistent.json", "--out", dir_.string()}),
            kExitConfigError);
  EXPECT_EQ(cli({"launch"}), kExitConfigError);
  const auto cfg = write_config("sim.json", scalar_sim());
  EXPECT_EQ(cmd("simulate", cfg, dir_ / "o", {"--workers", "-2"}), kExitConfigError);
  EXPECT_EQ(cmd("gain-for-t", cfg, dir_ / "o"), kExitConfigError);
}

TEST_F(CliTest, ProcessExitCodes) {
  auto status = [&](const std::string& args) {
    const std::string command = std::string(SIKM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(command.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const auto ok = write_config("sim.json", scalar_sim());
  EXPECT_EQ(status("simulate --config " + ok.string() + " --out " + (dir_ / "a").string()), 0);
  Json bad = scalar_sim();
  bad["dt"] = 0.5;
  const auto b = write_config("bad.json", bad);
  EXPECT_EQ(status("simulate --config " + b.string() + " --out " + (dir_ / "b").string()), 1);
  Json eq = identity_sweep();
  eq["sweep"]["initial_errors"] = Json::parse("[[0, 0]]");
  const auto e = write_config("eq.json", eq);
  EXPECT_EQ(status("estimate --config " + e.string() + " --out " + (dir_ / "c").string()), 3);
  EXPECT_EQ(status("--help"), 0);
}

TEST_F(CliTest, ShippedConfigsParse) {
  const char* dir = std::getenv("SIKM_CONFIG_DIR");
  ASSERT_NE(dir, nullptr);
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 5);
}

}  // namespace
}  // namespace sikm::app
