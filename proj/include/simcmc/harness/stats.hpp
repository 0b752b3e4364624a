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

#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "simcmc/errors.hpp"
#include "simcmc/log_domain.hpp"
#include "simcmc/serialization.hpp"

namespace simcmc::harness {

/// Root mean squared error between paired sequences.
inline double rmse(std::span<const double> estimates, std::span<const double> truths) {
  if (estimates.size() != truths.size()) throw length_mismatch(estimates.size(), truths.size());
  if (estimates.empty()) throw error("rmse of an empty sequence");
  double s = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const double e = estimates[k] - truths[k];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(estimates.size()));
}

inline double rmse(std::span<const double> estimates, double truth) {
  const std::vector<double> t(estimates.size(), truth);
  return rmse(estimates, t);
}

/// log of the mean of exp(values).
inline double log_mean_exp(std::span<const double> values) {
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

/// P(X >= wins) for X ~ Binomial(trials, 1/2): the one-sided sign-test p-value.
inline double sign_test_p_value(std::size_t wins, std::size_t trials) {
  if (wins > trials) throw error("more wins than trials");
  double p = 0.0;
  for (std::size_t k = wins; k <= trials; ++k) {
    const double log_choose = std::lgamma(static_cast<double>(trials) + 1.0) -
                              std::lgamma(static_cast<double>(k) + 1.0) -
                              std::lgamma(static_cast<double>(trials - k) + 1.0);
    p += std::exp(log_choose - static_cast<double>(trials) * std::log(2.0));
  }
  return std::min(p, 1.0);
}

/// Independent per-replication seed from the base seed and a label.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t h = fnv1a(std::string(label));
  for (std::uint64_t v : {base, a, b}) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

}  // namespace simcmc::harness
