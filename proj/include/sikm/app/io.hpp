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

// CSV and JSON writers. Numbers are printed with 17 significant digits so a
// file round-trips to the exact doubles that produced it.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sikm/app/config.hpp"

namespace sikm::app {

std::string fmt(double v);

// Columns: t, ‖e‖, k_h, is_sample, q_1..q_n, qr_1..qr_n, u_1..u_n.
void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace);

Json metrics_json(const Metrics& m, const std::string& hash);
Json abort_json(const AbortReport& report);
Json theta_json(const ThetaParams& th);
Json thresholds_json(const Thresholds& t);
Json kkt_json(const KktResidual& kkt);

void write_json(const std::filesystem::path& path, const Json& j);

// region.csv (k,tau,z,stable), region_k.csv (k,tau_s,tau_o) and
// region_tau.csv (tau,k_o) inside `dir`.
void write_region_csvs(const std::filesystem::path& dir, const RegionGrid& g);

// One row per sample with its regressors and slack against theta.
void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<EstimationSample>& samples,
                       const ThetaParams& theta);

}  // namespace sikm::app
