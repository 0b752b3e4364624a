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

// Real-time tracking under a fixed per-time-unit budget of N particle
// moves. Three arms:
//   smc-n        N particles, a filter step at every time unit
//   smc-n-prime  N' = factor * N particles, steps only on the grid
//                (off-grid observations ignored)
//   simcmc       levels at arrival times; between arrivals the budget
//                accrues on the newest levels
// Each arm is scored against filter means E(X_n | y_1:n) from a large SMC
// run; the error against the simulated states is reported alongside.

#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "simcmc/harness/config.hpp"
#include "simcmc/harness/stats.hpp"
#include "simcmc/models/state_space.hpp"
#include "simcmc/models/tracking.hpp"
#include "simcmc/sampler.hpp"
#include "simcmc/smc.hpp"

namespace simcmc::harness {

struct tracking_arm_result {
  std::string arm;
  std::size_t particles = 0;        ///< particles (SMC) or per-unit updates (SIMCMC)
  std::vector<double> rmse;         ///< vs reference filter means, one per realization
  double mean_rmse = 0.0;
  std::vector<double> truth_rmse;   ///< vs simulated states
  double mean_truth_rmse = 0.0;
  double seconds = 0.0;             ///< timing
};

struct sign_test_result {
  bool skipped = false;
  std::string reason;
  std::size_t wins = 0;
  std::size_t trials = 0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool passed() const { return skipped || p_value <= alpha; }
};

struct tracking_result {
  experiment_config config;
  std::vector<std::size_t> arrivals;  ///< observation count per realization
  double reference_seconds = 0.0;
  std::vector<tracking_arm_result> arms;
  std::optional<sign_test_result> sign_test;
  double total_seconds = 0.0;
};

inline tracking_spec tracking_spec_of(const experiment_config& c) {
  tracking_spec s;
  s.noise_scale = c.noise_scale;
  s.bearing_var = c.bearing_var;
  s.observe_probability = c.observe_probability;
  s.grid = c.grid;
  s.initial_cov = c.initial_cov_scale * s.initial_cov;
  return s;
}

/// The configuration leaves nothing random in the state trajectory.
inline bool degenerate_dynamics(const experiment_config& c) {
  return c.noise_scale <= 1e-6 && c.initial_cov_scale <= 1e-6;
}

namespace detail {

using state_estimates = std::vector<tracking_state>;

inline double state_rmse(const state_estimates& est, const state_estimates& truth) {
  if (est.size() != truth.size()) throw length_mismatch(est.size(), truth.size());
  double s = 0.0;
  for (std::size_t n = 0; n < est.size(); ++n) s += (est[n] - truth[n]).squaredNorm();
  return std::sqrt(s / static_cast<double>(est.size()));
}

/// Fills times 1..P from filtered means at `times` (1-based), predicting
/// forward with the noise-free dynamics in between and before the first.
inline state_estimates fill_by_prediction(const tracking_spec& spec, std::size_t horizon,
                                          const std::vector<std::size_t>& times,
                                          const std::vector<tracking_state>& means) {
  state_estimates out(horizon);
  std::size_t k = 0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    while (k < times.size() && times[k] <= t) ++k;
    if (k == 0) {
      out[t - 1] = cv_transition(static_cast<double>(t - 1) * spec.step) * spec.initial_mean;
    } else {
      out[t - 1] = cv_transition(static_cast<double>(t - times[k - 1]) * spec.step) * means[k - 1];
    }
  }
  return out;
}

inline tracking_state weighted_mean(const weighted_particles<tracking_state>& cloud) {
  tracking_state m = tracking_state::Zero();
  for (std::size_t k = 0; k < cloud.weights.size(); ++k) m += cloud.weights[k] * cloud.last[k];
  return m;
}

inline state_estimates run_smc_every_step(const tracking_spec& spec, const simulated_data<tracking_state, double>& data,
                                          std::size_t particles, std::uint64_t seed) {
  const std::size_t horizon = data.states.size();
  const tracking model = tracking::unit(spec, horizon);
  const ssm_targets<tracking> targets(model, data.observations);
  const prior_proposal<tracking> q(model);
  state_estimates out(horizon);
  run_smc(targets, q, particles, seed, horizon,
          [&](const weighted_particles<tracking_state>& cloud) { out[cloud.level - 1] = weighted_mean(cloud); });
  return out;
}

inline state_estimates run_smc_on_grid(const tracking_spec& spec, const simulated_data<tracking_state, double>& data,
                                       std::size_t particles, std::uint64_t seed) {
  const std::size_t horizon = data.states.size();
  std::vector<std::size_t> times;
  for (std::size_t t = spec.grid; t <= horizon; t += spec.grid) times.push_back(t);
  std::vector<tracking_state> means;
  if (!times.empty()) {
    const tracking model(spec, times);
    observation_sequence<double> y;
    for (auto t : times) y.push_back(data.observations[t - 1]);
    const ssm_targets<tracking> targets(model, y);
    const prior_proposal<tracking> q(model);
    run_smc(targets, q, particles, seed, times.size(),
            [&](const weighted_particles<tracking_state>& cloud) { means.push_back(weighted_mean(cloud)); });
  }
  return fill_by_prediction(spec, horizon, times, means);
}

/// Levels sit at the arrival times. During each time unit from arrival k up
/// to the next arrival, N updates go to levels max(1, k-L+1)..k in
/// round-robin order; the estimate for that unit is read at its end.
inline state_estimates run_simcmc_adaptive(const tracking_spec& spec,
                                           const simulated_data<tracking_state, double>& data,
                                           std::size_t per_unit, std::size_t lag, std::size_t burn_in,
                                           std::uint64_t seed) {
  const std::size_t horizon = data.states.size();
  std::vector<std::size_t> times;
  for (std::size_t t = 1; t <= horizon; ++t) {
    if (data.observations[t - 1]) times.push_back(t);
  }
  state_estimates out = fill_by_prediction(spec, horizon, {}, {});
  if (times.empty()) return out;
  const tracking model(spec, times);
  observation_sequence<double> y;
  for (auto t : times) y.push_back(data.observations[t - 1]);
  const ssm_targets<tracking> targets(model, y);
  const prior_proposal<tracking> q(model);
  simcmc_options o;
  o.seed = seed;
  o.burn_in = burn_in;
  auto s = simcmc_sampler<ssm_targets<tracking>, prior_proposal<tracking>>::nested(
      targets, q, prior_path(model, times.size(), seed), o);
  for (std::size_t k = 1; k <= times.size(); ++k) {
    s.set_frontier(k);
    const std::size_t first = k >= lag ? k - lag + 1 : 1;
    const std::size_t rounds = std::max<std::size_t>(1, per_unit / (k - first + 1));
    const std::size_t next = k < times.size() ? times[k] : horizon + 1;
    for (std::size_t t = times[k - 1]; t < next; ++t) {
      s.accrue(first, k, rounds);
      const auto& r = s.reservoir(k);
      const std::size_t lo = window_start(r.size() - 1, burn_in);
      tracking_state m = tracking_state::Zero();
      for (std::size_t i = lo; i < r.size(); ++i) m += r.block_at(i);
      m /= static_cast<double>(r.size() - lo);
      out[t - 1] = cv_transition(static_cast<double>(t - times[k - 1]) * spec.step) * m;
    }
  }
  return out;
}

}  // namespace detail

inline simulated_data<tracking_state, double> simulate_tracking(const tracking_spec& spec, std::size_t horizon,
                                                                std::uint64_t seed) {
  const tracking model = tracking::unit(spec, horizon);
  return simulate(model, horizon, seed, [&](std::size_t n, engine& rng) { return model.observed(n, rng); });
}

inline tracking_result tracking_comparison(const experiment_config& c) {
  c.validate();
  if (c.model != "tracking") throw config_error("model", "tracking comparison needs model 'tracking'");
  const auto start = std::chrono::steady_clock::now();
  const tracking_spec spec = tracking_spec_of(c);
  tracking_result out;
  out.config = c;
  for (const auto& arm : c.arms) {
    tracking_arm_result a;
    a.arm = arm;
    a.particles = arm == "smc-n-prime" ? c.n_prime_factor * c.budget : c.budget;
    out.arms.push_back(a);
  }
  for (std::size_t r = 0; r < c.replications; ++r) {
    const auto data = simulate_tracking(spec, c.horizon, derive_seed(c.data_seed, "tracking-data", r));
    std::size_t arrivals = 0;
    for (const auto& y : data.observations) arrivals += y.has_value();
    out.arrivals.push_back(arrivals);
    const auto ref_start = std::chrono::steady_clock::now();
    const auto reference =
        detail::run_smc_every_step(spec, data, c.reference_particles, derive_seed(c.seed, "reference", r));
    out.reference_seconds += detail::seconds_since(ref_start);
    for (auto& a : out.arms) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::uint64_t seed = derive_seed(c.seed, a.arm, r);
      detail::state_estimates est;
      if (a.arm == "smc-n") {
        est = detail::run_smc_every_step(spec, data, a.particles, seed);
      } else if (a.arm == "smc-n-prime") {
        est = detail::run_smc_on_grid(spec, data, a.particles, seed);
      } else {
        est = detail::run_simcmc_adaptive(spec, data, c.budget, c.lag, c.burn_in, seed);
      }
      a.rmse.push_back(detail::state_rmse(est, reference));
      a.truth_rmse.push_back(detail::state_rmse(est, data.states));
      a.seconds += detail::seconds_since(t0);
    }
  }
  for (auto& a : out.arms) {
    const auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    a.mean_rmse = mean(a.rmse);
    a.mean_truth_rmse = mean(a.truth_rmse);
  }

  const tracking_arm_result* simcmc_arm = nullptr;
  const tracking_arm_result* smc_arm = nullptr;
  for (const auto& a : out.arms) {
    if (a.arm == "simcmc") simcmc_arm = &a;
    if (a.arm == "smc-n") smc_arm = &a;
  }
  if (simcmc_arm && smc_arm) {
    sign_test_result t;
    t.alpha = c.checks.sign_test_alpha.value_or(0.05);
    t.trials = c.replications;
    if (degenerate_dynamics(c)) {
      t.skipped = true;
      t.reason = "degenerate dynamics: every arm tracks the deterministic trajectory";
    } else {
      for (std::size_t r = 0; r < c.replications; ++r) t.wins += simcmc_arm->rmse[r] < smc_arm->rmse[r];
      t.p_value = sign_test_p_value(t.wins, t.trials);
    }
    out.sign_test = t;
  }
  out.total_seconds = detail::seconds_since(start);
  return out;
}

}  // namespace simcmc::harness
