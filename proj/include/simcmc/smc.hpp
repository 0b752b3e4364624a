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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "simcmc/errors.hpp"
#include "simcmc/log_domain.hpp"
#include "simcmc/path.hpp"
#include "simcmc/reservoir.hpp"
#include "simcmc/rng.hpp"
#include "simcmc/target_model.hpp"

namespace simcmc {

/**
 * Stratified resampling: one uniform per stratum, u_k = (k + U_k) / N.
 *
 * Cumulative counts are pinned: the number of draws with index <= j lies
 * in [floor(N W_j), ceil(N W_j)] where W_j is the cumulative weight. Counts
 * of a single index can stray one further than that.
 */
inline std::vector<std::size_t> stratified_resample(std::span<const double> weights,
                                                    std::size_t count, engine& rng) {
  if (count == 0) throw bad_weights("resample count must be positive");
  if (weights.empty()) throw bad_weights("no weights to resample");
  double total = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!(weights[j] >= 0.0)) throw bad_weights("negative or NaN weight");
    if (weights[j] > 0.0) last_positive = j;
    total += weights[j];
  }
  if (std::abs(total - 1.0) > 1e-9) throw bad_weights("weights sum to " + std::to_string(total));

  std::vector<std::size_t> out;
  out.reserve(count);
  const double n = static_cast<double>(count);
  std::size_t j = 0;
  double cumulative = weights[0];
  for (std::size_t k = 0; k < count; ++k) {
    const double u = (static_cast<double>(k) + rng.uniform()) / n;
    while (u >= cumulative && j < last_positive) cumulative += weights[++j];
    out.push_back(j);
  }
  return out;
}

/// N particles at one level. After smc_step the weights are uniform
/// (resampling happens at every step).
template <class Block>
struct particle_population {
  using pointer = typename path<Block>::pointer;

  std::size_t level = 0;
  storage_mode mode = storage_mode::full_path;
  std::vector<pointer> paths;
  std::vector<Block> blocks;
  std::vector<double> weights;
  double log_likelihood = 0.0;

  std::size_t size() const { return weights.size(); }

  template <class F>
  decltype(auto) visit(std::size_t k, F&& f) const {
    if (level == 0) return f(path<Block>::empty_path());
    if (mode == storage_mode::full_path) return f(*paths[k]);
    return f(path<Block>::marginal(blocks[k], level));
  }

  static particle_population empty(std::size_t n, storage_mode mode) {
    particle_population p;
    p.mode = mode;
    p.weights.assign(n, 1.0 / static_cast<double>(n));
    return p;
  }
};

/// The importance-weighted particles of one step, before resampling.
template <class Block>
struct weighted_particles {
  std::size_t level = 0;
  std::vector<Block> last;
  std::vector<typename path<Block>::pointer> paths;  // full-path mode only
  std::vector<double> weights;                       // normalized
  double log_mean_weight = 0.0;

  template <class F>
  double expectation(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * f(last[k]);
    return s;
  }
};

/**
 * Extends every particle with q_n, weights it by w_n, adds log(mean w_n) to
 * the log-likelihood and resamples. Returns the weighted cloud before
 * resampling so callers can form lower-variance estimates from it.
 */
template <target_sequence T, proposal_family<typename T::block_type> Q>
weighted_particles<typename T::block_type> smc_step(
    particle_population<typename T::block_type>& pop, const T& targets, const Q& proposals,
    std::size_t n, std::uint64_t seed) {
  using Block = typename T::block_type;
  using path_type = path<Block>;
  check_level(n, targets.horizon());
  if (pop.level + 1 != n) throw error("population is not at level n-1");
  const std::size_t count = pop.size();

  weighted_particles<Block> cloud;
  cloud.level = n;
  cloud.last.reserve(count);
  std::vector<double> lw(count);
  if (pop.mode == storage_mode::full_path) cloud.paths.reserve(count);

  for (std::size_t k = 0; k < count; ++k) {
    engine rng = engine::keyed(seed, n, k, stream::propose);
    pop.visit(k, [&](const path_type& prefix) {
      Block x = proposals.sample(n, prefix, rng);
      lw[k] = log_weight(targets, proposals, n, prefix, x);
      if (pop.mode == storage_mode::full_path) {
        cloud.paths.push_back(path_type::make(n > 1 ? pop.paths[k] : nullptr, x));
      }
      cloud.last.push_back(std::move(x));
      return 0;
    });
  }

  const double lse = log_sum_exp(lw);
  if (lse == neg_inf) throw degenerate_weights(n);
  cloud.log_mean_weight = lse - std::log(static_cast<double>(count));
  cloud.weights.resize(count);
  for (std::size_t k = 0; k < count; ++k) cloud.weights[k] = std::exp(lw[k] - lse);

  engine rng = engine::keyed(seed, n, 0, stream::resample);
  const auto ancestors = stratified_resample(cloud.weights, count, rng);

  pop.level = n;
  pop.log_likelihood += cloud.log_mean_weight;
  pop.weights.assign(count, 1.0 / static_cast<double>(count));
  if (pop.mode == storage_mode::full_path) {
    std::vector<typename path_type::pointer> next(count);
    for (std::size_t k = 0; k < count; ++k) next[k] = cloud.paths[ancestors[k]];
    pop.paths = std::move(next);
  } else {
    std::vector<Block> next;
    next.reserve(count);
    for (std::size_t k = 0; k < count; ++k) next.push_back(cloud.last[ancestors[k]]);
    pop.blocks = std::move(next);
  }
  return cloud;
}

/// Storage an SMC run would pick for this model.
template <class T, class Q>
constexpr storage_mode default_storage() {
  return is_markovian<T>() && is_markovian<Q>() ? storage_mode::marginal_only
                                                : storage_mode::full_path;
}

/// Runs levels 1..last with `count` particles. observe(cloud) is called
/// after every step. Returns log Z_n-hat for n = 1..last.
template <target_sequence T, proposal_family<typename T::block_type> Q, class Observer>
std::vector<double> run_smc(const T& targets, const Q& proposals, std::size_t count,
                            std::uint64_t seed, std::size_t last, Observer&& observe) {
  auto pop = particle_population<typename T::block_type>::empty(count, default_storage<T, Q>());
  std::vector<double> log_z;
  log_z.reserve(last);
  for (std::size_t n = 1; n <= last; ++n) {
    auto cloud = smc_step(pop, targets, proposals, n, seed);
    observe(cloud);
    log_z.push_back(pop.log_likelihood);
  }
  return log_z;
}

template <target_sequence T, proposal_family<typename T::block_type> Q>
std::vector<double> run_smc(const T& targets, const Q& proposals, std::size_t count,
                            std::uint64_t seed) {
  return run_smc(targets, proposals, count, seed, targets.horizon(), [](const auto&) {});
}

}  // namespace simcmc
