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

// Log-likelihood experiments: replicated SIMCMC and SMC runs on one fixed
// dataset, scored by RMSE against the Kalman value or a large SMC reference.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "simcmc/harness/config.hpp"
#include "simcmc/harness/dataset.hpp"
#include "simcmc/harness/stats.hpp"
#include "simcmc/models/kitagawa.hpp"
#include "simcmc/models/linear_gaussian.hpp"
#include "simcmc/models/state_space.hpp"
#include "simcmc/sampler.hpp"
#include "simcmc/smc.hpp"

namespace simcmc::harness {

struct count_row {
  std::size_t count = 0;
  std::vector<double> log_likelihoods;  ///< one per replication
  double rmse = 0.0;
  double mean = 0.0;
  std::vector<double> acceptance;  ///< per level, averaged over replications (SIMCMC only)
  double seconds = 0.0;            ///< timing; excluded from determinism comparisons
};

struct arm_result {
  std::string algorithm;
  std::vector<count_row> rows;
};

/// Fraction of posterior mass on x_n > 0, per level.
struct sign_mass_report {
  double threshold = 0.1;
  std::size_t sample_count = 0;
  std::vector<double> reference_positive;
  std::vector<double> simcmc_positive;
  std::vector<std::size_t> bimodal_levels;
  std::vector<std::size_t> failing_levels;
  bool preserved() const { return failing_levels.empty(); }
};

struct experiment_result {
  experiment_config config;
  std::string truth_source;
  double truth = 0.0;
  std::vector<double> reference_runs;
  double reference_seconds = 0.0;
  std::vector<arm_result> arms;
  std::optional<sign_mass_report> sign_mass;
  double total_seconds = 0.0;
};

namespace detail {

inline bool is_simcmc(const std::string& algorithm) { return algorithm.rfind("simcmc", 0) == 0; }

/// Runs every (algorithm, N, replication) cell. `on_sampler(N, sampler)` sees
/// each finished SIMCMC run.
template <class Model, class T, class Q, class OnSampler>
std::vector<arm_result> run_arms(const experiment_config& c, const Model& model, const T& targets,
                                 const Q& proposals, double truth, OnSampler&& on_sampler) {
  using sampler_type = simcmc_sampler<T, Q>;
  const std::size_t horizon = targets.horizon();
  std::vector<arm_result> arms;
  for (const auto& algorithm : c.algorithms) {
    arm_result arm{algorithm, {}};
    for (std::size_t count : c.sample_counts) {
      const auto start = std::chrono::steady_clock::now();
      count_row row;
      row.count = count;
      if (is_simcmc(algorithm)) row.acceptance.assign(horizon, 0.0);
      for (std::size_t r = 0; r < c.replications; ++r) {
        const std::uint64_t seed = derive_seed(c.seed, algorithm, count, r);
        if (algorithm == "smc") {
          row.log_likelihoods.push_back(
              run_smc(targets, proposals, count, seed, horizon, [](const auto&) {}).back());
          continue;
        }
        simcmc_options o;
        o.seed = seed;
        o.burn_in = c.burn_in;
        o.mode = algorithm == "simcmc-parallel" ? interaction::parallel_lagged : interaction::sequential;
        auto s = sampler_type::nested(targets, proposals, prior_path(model, horizon, seed), o);
        s.run(count);
        row.log_likelihoods.push_back(s.estimates().log_z.back());
        const auto rates = s.acceptance_rates();
        for (std::size_t n = 0; n < horizon; ++n) row.acceptance[n] += rates[n] / static_cast<double>(c.replications);
        on_sampler(algorithm, count, s);
      }
      row.rmse = rmse(row.log_likelihoods, truth);
      row.mean = log_mean_exp(row.log_likelihoods);
      row.seconds = seconds_since(start);
      arm.rows.push_back(std::move(row));
    }
    arms.push_back(std::move(arm));
  }
  return arms;
}

template <int D>
experiment_result run_linear_gaussian(const experiment_config& c) {
  using vector_type = Eigen::Matrix<double, D, 1>;
  const auto start = std::chrono::steady_clock::now();
  linear_gaussian_spec spec{doubly_stochastic(static_cast<Eigen::Index>(c.dimension), c.matrix_seed),
                            c.sigma_v, c.sigma_w};
  const linear_gaussian<D> model(spec);
  auto data = c.dataset
                  ? dataset_from_json<vector_type, vector_type>(read_json_file(*c.dataset), "linear-gaussian")
                  : simulate(model, c.horizon, c.data_seed);
  if (data.observations.size() != c.horizon) throw config_error("horizon", "does not match the dataset");
  const ssm_targets<linear_gaussian<D>> targets(model, data.observations);

  experiment_result out;
  out.config = c;
  out.truth_source = "kalman";
  out.truth = kalman_log_likelihood(spec, data.observations);
  auto ignore = [](const std::string&, std::size_t, const auto&) {};
  if (c.proposal == "optimal") {
    const lg_optimal_proposal<D> q(model, data.observations);
    out.arms = run_arms(c, model, targets, q, out.truth, ignore);
  } else {
    const prior_proposal<linear_gaussian<D>> q(model);
    out.arms = run_arms(c, model, targets, q, out.truth, ignore);
  }
  out.total_seconds = seconds_since(start);
  return out;
}

inline experiment_result run_kitagawa(const experiment_config& c) {
  const auto start = std::chrono::steady_clock::now();
  const kitagawa model({c.var_v, c.var_w, c.initial_var});
  auto data = c.dataset ? dataset_from_json<double, double>(read_json_file(*c.dataset), "kitagawa")
                        : simulate(model, c.horizon, c.data_seed);
  if (data.observations.size() != c.horizon) throw config_error("horizon", "does not match the dataset");
  const ssm_targets<kitagawa> targets(model, data.observations);
  const prior_proposal<kitagawa> q(model);

  experiment_result out;
  out.config = c;
  out.truth_source = "smc-reference";
  sign_mass_report signs;
  signs.reference_positive.assign(c.horizon, 0.0);
  signs.simcmc_positive.assign(c.horizon, 0.0);
  const auto ref_start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < c.reference_runs; ++k) {
    const auto lz = run_smc(targets, q, c.reference_particles, derive_seed(c.seed, "reference", k), c.horizon,
                            [&](const weighted_particles<double>& cloud) {
                              const double pos = cloud.expectation([](double x) { return x > 0.0 ? 1.0 : 0.0; });
                              signs.reference_positive[cloud.level - 1] += pos / static_cast<double>(c.reference_runs);
                            });
    out.reference_runs.push_back(lz.back());
  }
  out.truth = log_mean_exp(out.reference_runs);
  out.reference_seconds = seconds_since(ref_start);

  // Sign mass of the first SIMCMC arm at the largest N, pooled over replications.
  const std::size_t largest = *std::max_element(c.sample_counts.begin(), c.sample_counts.end());
  const auto first_simcmc = std::find_if(c.algorithms.begin(), c.algorithms.end(), is_simcmc);
  signs.sample_count = largest;
  auto on_sampler = [&](const std::string& algorithm, std::size_t count, const auto& s) {
    if (first_simcmc == c.algorithms.end() || algorithm != *first_simcmc || count != largest) return;
    for (std::size_t n = 1; n <= c.horizon; ++n) {
      signs.simcmc_positive[n - 1] +=
          s.empirical_expectation(n, [](const path<double>& p) { return p.last() > 0.0 ? 1.0 : 0.0; }) /
          static_cast<double>(c.replications);
    }
  };
  out.arms = run_arms(c, model, targets, q, out.truth, on_sampler);

  if (first_simcmc != c.algorithms.end()) {
    for (std::size_t n = 1; n <= c.horizon; ++n) {
      const double ref = signs.reference_positive[n - 1];
      if (ref < signs.threshold || ref > 1.0 - signs.threshold) continue;
      signs.bimodal_levels.push_back(n);
      const double got = signs.simcmc_positive[n - 1];
      if (got < signs.threshold || got > 1.0 - signs.threshold) signs.failing_levels.push_back(n);
    }
    out.sign_mass = std::move(signs);
  }
  out.total_seconds = seconds_since(start);
  return out;
}

}  // namespace detail

/// Replicated log-likelihood experiment for the linear Gaussian or Kitagawa model.
inline experiment_result run_experiment(const experiment_config& c) {
  c.validate();
  if (c.model == "linear-gaussian") {
    if (c.dimension == 1) return detail::run_linear_gaussian<1>(c);
    if (c.dimension == 2) return detail::run_linear_gaussian<2>(c);
    return detail::run_linear_gaussian<Eigen::Dynamic>(c);
  }
  if (c.model == "kitagawa") return detail::run_kitagawa(c);
  throw config_error("model", "run-experiment handles linear-gaussian and kitagawa; use tracking");
}

}  // namespace simcmc::harness
