/*
 * Copyright 2026 The simcmc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Exact kernel verification over a batch of random discrete instances.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "simcmc/harness/stats.hpp"
#include "simcmc/oracle/kernel.hpp"

namespace simcmc::harness {

struct kernel_suite_result {
  std::vector<oracle::instance_result> instances;
  double row_sum_error = 0.0;
  double stationarity = 0.0;
  double fixed_point = 0.0;
  double identity = 0.0;
  double rho_max = 0.0;
  std::size_t non_geometric = 0;
  double seconds = 0.0;

  bool passed(double tolerance = 1e-12) const {
    return row_sum_error <= tolerance && stationarity <= tolerance && fixed_point <= tolerance &&
           identity <= tolerance;
  }
};

/// Instance k: alphabet 2..4 and horizon 1..3 cycle through all nine
/// combinations; every other instance has zero cells in its weights.
inline kernel_suite_result kernel_suite(std::size_t instances, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  kernel_suite_result out;
  for (std::size_t k = 0; k < instances; ++k) {
    const std::size_t alphabet = 2 + k % 3;
    const std::size_t horizon = 1 + (k / 3) % 3;
    const auto r = oracle::verify_instance(alphabet, horizon, derive_seed(seed, "kernel-instance", k),
                                           k % 2 ? 0.2 : 0.0);
    out.row_sum_error = std::max(out.row_sum_error, r.row_sum_error);
    out.stationarity = std::max(out.stationarity, r.stationarity);
    out.fixed_point = std::max(out.fixed_point, r.fixed_point);
    out.identity = std::max(out.identity, r.identity);
    out.rho_max = std::max(out.rho_max, r.rho_envelope);
    out.non_geometric += !r.geometric;
    out.instances.push_back(r);
  }
  out.seconds = detail::seconds_since(start);
  return out;
}

}  // namespace simcmc::harness
