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

// Small models and statistics helpers shared by the test suites.

#pragma once

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "simcmc/log_domain.hpp"
#include "simcmc/models/discrete.hpp"
#include "simcmc/path.hpp"
#include "simcmc/rng.hpp"

namespace simcmc::testing {

/// Two states, two levels. Paths (x1, x2) index as 2 x1 + x2.
inline discrete_targets two_state_p2() {
  return discrete_targets(2, {{1.0, 2.0}, {0.5, 1.5, 2.0, 0.7}},
                          {{0.5, 0.5}, {0.3, 0.7, 0.6, 0.4}});
}

/// Same as two_state_p2 but gamma_2(1, 1) = 0.
inline discrete_targets two_state_p2_with_hole() {
  return discrete_targets(2, {{1.0, 2.0}, {0.5, 1.5, 2.0, 0.0}},
                          {{0.5, 0.5}, {0.3, 0.7, 0.6, 0.4}});
}

/// Two states, three levels; the fixed model of the convergence-rate check.
inline discrete_targets two_state_p3() {
  return discrete_targets(
      2,
      {{1.0, 2.0},
       {0.5, 1.5, 2.0, 0.7},
       {0.2, 0.9, 1.1, 0.4, 1.3, 0.6, 0.3, 0.8}},
      {{0.5, 0.5}, {0.3, 0.7, 0.6, 0.4}, {0.5, 0.5, 0.2, 0.8, 0.7, 0.3, 0.4, 0.6}});
}

/// gamma_n = c^n prod_k q_k, so every incremental weight equals c.
inline discrete_targets matched(std::size_t alphabet, std::size_t horizon, double c,
                                std::uint64_t seed) {
  auto base = discrete_targets::random(alphabet, horizon, seed);
  std::vector<std::vector<double>> gamma(horizon), q(horizon);
  for (std::size_t n = 1; n <= horizon; ++n) {
    q[n - 1] = base.proposal_table(n);
    gamma[n - 1].resize(q[n - 1].size());
    for (std::size_t x = 0; x < q[n - 1].size(); ++x) {
      const double prev = n == 1 ? 1.0 : gamma[n - 2][x / alphabet];
      gamma[n - 1][x] = prev * c * q[n - 1][x];
    }
  }
  return discrete_targets(alphabet, std::move(gamma), std::move(q));
}

/// Uniform target on [0, 1] at every level, proposing N(mean, sd^2) blocks.
struct unit_interval_model {
  using block_type = double;
  std::size_t levels = 1;
  double mean = 0.5;
  double sd = 1.0;

  std::size_t horizon() const { return levels; }
  double log_gamma(std::size_t n, const path<double>& p) const {
    for (std::size_t k = 1; k <= n; ++k) {
      const double x = p[k];
      if (x < 0.0 || x > 1.0) return neg_inf;
    }
    return 0.0;
  }
  double sample(std::size_t, const path<double>&, engine& rng) const {
    std::normal_distribution<double> z(mean, sd);
    return z(rng);
  }
  double log_density(std::size_t, const path<double>&, double x) const {
    return log_normal_pdf(x, mean, sd * sd);
  }
};

/// Standard error of the mean of a correlated series by non-overlapping batch means.
inline double batch_means_se(const std::vector<double>& xs, std::size_t batches = 50) {
  const std::size_t size = xs.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < size; ++k) s += xs[b * size + k];
    means.push_back(s / static_cast<double>(size));
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
  double v = 0.0;
  for (double x : means) v += (x - m) * (x - m);
  v /= static_cast<double>(batches - 1);
  return std::sqrt(v / static_cast<double>(batches));
}

inline double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sd_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return std::sqrt(v / static_cast<double>(xs.size() - 1));
}

}  // namespace simcmc::testing
