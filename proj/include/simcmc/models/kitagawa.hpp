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

#include <cmath>
#include <cstddef>
#include <numbers>

#include "simcmc/errors.hpp"
#include "simcmc/log_domain.hpp"
#include "simcmc/models/gaussian.hpp"
#include "simcmc/rng.hpp"

namespace simcmc {

struct kitagawa_spec {
  double var_v = 5.0;
  double var_w = 5.0;
  double initial_var = 5.0;

  void validate() const {
    if (!(var_v > 0.0) || !(var_w > 0.0) || !(initial_var > 0.0)) {
      throw error("kitagawa variances must be positive");
    }
  }
};

/// E[X_n | X_{n-1} = x] = x/2 + 25x/(1 + x^2) + 8 cos(1.2 n).
inline double kitagawa_mean(double previous, std::size_t n) {
  return previous / 2.0 + 25.0 * previous / (1.0 + previous * previous) +
         8.0 * std::cos(1.2 * static_cast<double>(n));
}

/// Y_n = X_n^2 / 20 + W_n; the sign of X_n is not identified by one observation.
class kitagawa {
 public:
  using state_type = double;
  using observation_type = double;

  explicit kitagawa(kitagawa_spec spec = {}) : spec_(spec) { spec_.validate(); }

  const kitagawa_spec& spec() const { return spec_; }

  double log_initial(double x) const { return log_normal_pdf(x, 0.0, spec_.initial_var); }
  double sample_initial(engine& rng) const {
    return std::sqrt(spec_.initial_var) * standard_normal(rng);
  }

  double log_transition(std::size_t n, double prev, double x) const {
    return log_normal_pdf(x, kitagawa_mean(prev, n), spec_.var_v);
  }
  double sample_transition(std::size_t n, double prev, engine& rng) const {
    return kitagawa_mean(prev, n) + std::sqrt(spec_.var_v) * standard_normal(rng);
  }

  double log_observation(double x, double y) const {
    return log_normal_pdf(y, x * x / 20.0, spec_.var_w);
  }
  double sample_observation(double x, engine& rng) const {
    return x * x / 20.0 + std::sqrt(spec_.var_w) * standard_normal(rng);
  }

  /// Largest possible g(x, y): the Gaussian density at its mode.
  double observation_density_bound() const {
    return 1.0 / std::sqrt(2.0 * std::numbers::pi * spec_.var_w);
  }

 private:
  kitagawa_spec spec_;
};

}  // namespace simcmc
