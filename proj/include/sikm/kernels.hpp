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

// Data-parallel loop helper shared by the sweep kernels (candidate gains,
// region grids, sample collection, strategy comparison). Every kernel takes an
// Execution argument; kSerial is the reference path the tests compare the
// OpenMP path against, and both must produce bitwise-identical results.

#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>

namespace sikm {

enum class Execution { kSerial, kParallel };

// Bounds the OpenMP worker pool; n <= 0 keeps the runtime default.
void set_workers(int n);
int max_workers();

// Calls body(i) for i in [0, n). Iterations must write disjoint outputs. The
// first exception thrown by any iteration is rethrown after the loop.
template <typename Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
  if (exec == Execution::kSerial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace sikm
