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

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "simcmc/log_domain.hpp"
#include "simcmc/path.hpp"
#include "simcmc/rng.hpp"

namespace simcmc {

/**
 * X_1 ~ mu, X_n | x_{n-1} ~ f_n(x_{n-1}, .), Y_n | x_n ~ g(x_n, .).
 * The transition may depend on the step index n (n >= 2).
 */
template <class M>
concept state_space_model =
    requires(const M& m, std::size_t n, const typename M::state_type& x,
             const typename M::observation_type& y, engine& rng) {
      typename M::state_type;
      typename M::observation_type;
      { m.log_initial(x) } -> std::convertible_to<double>;
      { m.sample_initial(rng) } -> std::convertible_to<typename M::state_type>;
      { m.log_transition(n, x, x) } -> std::convertible_to<double>;
      { m.sample_transition(n, x, rng) } -> std::convertible_to<typename M::state_type>;
      { m.log_observation(x, y) } -> std::convertible_to<double>;
      { m.sample_observation(x, rng) } -> std::convertible_to<typename M::observation_type>;
    };

template <class Obs>
using observation_sequence = std::vector<std::optional<Obs>>;

/**
 * gamma_n(x_{1:n}) = mu(x_1) g(x_1, y_1) prod_{k=2..n} f_k(x_{k-1}, x_k) g(x_k, y_k),
 * where a missing y_k contributes a factor 1. pi_n is then the joint
 * posterior p(x_{1:n} | y_{1:n}) and Z_n = p(y_{1:n}).
 */
template <state_space_model M>
class ssm_targets {
 public:
  using block_type = typename M::state_type;
  using observation_type = typename M::observation_type;
  static constexpr bool markovian = true;

  ssm_targets(const M& model, observation_sequence<observation_type> y)
      : model_(&model), y_(std::move(y)) {}

  std::size_t horizon() const { return y_.size(); }
  const M& model() const { return *model_; }
  const observation_sequence<observation_type>& observations() const { return y_; }

  double log_observation_term(std::size_t n, const block_type& x) const {
    const auto& y = y_.at(n - 1);
    return y ? model_->log_observation(x, *y) : 0.0;
  }

  double log_gamma_ratio(std::size_t n, const path<block_type>& prefix,
                         const block_type& x) const {
    const double dynamics =
        n == 1 ? model_->log_initial(x) : model_->log_transition(n, prefix.last(), x);
    return dynamics + log_observation_term(n, x);
  }

  double log_gamma(std::size_t n, const path<block_type>& p) const {
    if (n == 0) return 0.0;
    double total = 0.0;
    const path<block_type>* node = &p;
    for (std::size_t k = n; k >= 1; --k) {
      const auto& prefix = node->prefix();
      total += log_gamma_ratio(k, prefix, node->last());
      node = &prefix;
    }
    return total;
  }

 private:
  const M* model_;
  observation_sequence<observation_type> y_;
};

/// q_1 = mu, q_n = f_n. The incremental weight is then g(x_n, y_n).
template <state_space_model M>
class prior_proposal {
 public:
  using block_type = typename M::state_type;
  static constexpr bool markovian = true;

  explicit prior_proposal(const M& model) : model_(&model) {}

  block_type sample(std::size_t n, const path<block_type>& prefix, engine& rng) const {
    return n == 1 ? model_->sample_initial(rng) : model_->sample_transition(n, prefix.last(), rng);
  }

  double log_density(std::size_t n, const path<block_type>& prefix, const block_type& x) const {
    return n == 1 ? model_->log_initial(x) : model_->log_transition(n, prefix.last(), x);
  }

 private:
  const M* model_;
};

template <class State, class Obs>
struct simulated_data {
  std::vector<State> states;
  observation_sequence<Obs> observations;
  std::uint64_t seed = 0;

  std::vector<bool> presence() const {
    std::vector<bool> out;
    out.reserve(observations.size());
    for (const auto& y : observations) out.push_back(y.has_value());
    return out;
  }
};

/// Draws a trajectory of length P and observations at the indices where
/// observed(n) is true.
template <state_space_model M, class Schedule>
simulated_data<typename M::state_type, typename M::observation_type> simulate(
    const M& model, std::size_t horizon, std::uint64_t seed, Schedule&& observed) {
  simulated_data<typename M::state_type, typename M::observation_type> out;
  out.seed = seed;
  for (std::size_t n = 1; n <= horizon; ++n) {
    engine dyn = engine::keyed(seed, n, 0, stream::simulate);
    engine obs = engine::keyed(seed, n, 1, stream::simulate);
    engine flag = engine::keyed(seed, n, 2, stream::simulate);
    out.states.push_back(n == 1 ? model.sample_initial(dyn)
                                : model.sample_transition(n, out.states.back(), dyn));
    if (observed(n, flag)) {
      out.observations.emplace_back(model.sample_observation(out.states.back(), obs));
    } else {
      out.observations.emplace_back(std::nullopt);
    }
  }
  return out;
}

template <state_space_model M>
simulated_data<typename M::state_type, typename M::observation_type> simulate(
    const M& model, std::size_t horizon, std::uint64_t seed) {
  return simulate(model, horizon, seed, [](std::size_t, engine&) { return true; });
}

/// A complete path drawn from the prior, for nested initialization.
template <state_space_model M>
typename path<typename M::state_type>::pointer prior_path(const M& model, std::size_t horizon,
                                                          std::uint64_t seed) {
  typename path<typename M::state_type>::pointer p;
  for (std::size_t n = 1; n <= horizon; ++n) {
    engine rng = engine::keyed(seed, n, 0, stream::initialize);
    auto x = n == 1 ? model.sample_initial(rng) : model.sample_transition(n, p->last(), rng);
    p = path<typename M::state_type>::make(std::move(p), std::move(x));
  }
  return p;
}

}  // namespace simcmc
