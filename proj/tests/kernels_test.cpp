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


#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "sikm/kernels.hpp"

namespace sikm {
namespace {

std::vector<double> evaluate(Execution exec, std::size_t n) {
  std::vector<double> out(n);
  for_each_index(n, exec, [&](std::size_t i) {
    double acc = 0.0;
    for (int j = 1; j < 200; ++j) acc += std::sin(0.001 * i * j) / j;
    out[i] = acc;
  });
  return out;
}

TEST(Kernels, SerialAndParallelAreBitwiseEqual) {
  EXPECT_EQ(evaluate(Execution::kSerial, 5000), evaluate(Execution::kParallel, 5000));
}

TEST(Kernels, EveryIndexVisitedOnce) {
  std::vector<std::atomic<int>> hits(1000);
  for_each_index(hits.size(), Execution::kParallel, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Kernels, ExceptionsPropagate) {
  for (Execution exec : {Execution::kSerial, Execution::kParallel}) {
    EXPECT_THROW(for_each_index(100, exec,
                                [](std::size_t i) {
                                  if (i == 37) throw std::runtime_error("boom");
                                }),
                 std::runtime_error);
  }
}

TEST(Kernels, WorkerBound) {
  const int before = max_workers();
  set_workers(1);
  EXPECT_EQ(max_workers(), 1);
  set_workers(0);  // zero keeps the current setting
  EXPECT_EQ(max_workers(), 1);
  set_workers(before);
  EXPECT_EQ(max_workers(), before);
  EXPECT_NO_THROW(for_each_index(0, Execution::kParallel, [](std::size_t) {}));
}

}  // namespace
}  // namespace sikm
