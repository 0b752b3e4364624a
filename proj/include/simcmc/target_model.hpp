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
#include <concepts>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "simcmc/errors.hpp"
#include "simcmc/log_domain.hpp"
#include "simcmc/path.hpp"
#include "simcmc/rng.hpp"

namespace simcmc {

/**
 * A sequence of unnormalized targets gamma_1..gamma_P on growing path spaces.
 *
 * log_gamma(n, x) must be finite exactly on the support S_n and -inf outside
 * it. By convention log_gamma(0, empty) = 0.
 */
template <class T>
concept target_sequence = requires(const T& t, std::size_t n,
                                   const path<typename T::block_type>& p) {
  typename T::block_type;
  { t.horizon() } -> std::convertible_to<std::size_t>;
  { t.log_gamma(n, p) } -> std::convertible_to<double>;
};

/// Targets that can return log gamma_n(prefix, x) - log gamma_{n-1}(prefix)
/// without walking the whole path.
template <class T>
concept incremental_target =
    target_sequence<T> &&
    requires(const T& t, std::size_t n, const path<typename T::block_type>& prefix,
             const typename T::block_type& x) {
      { t.log_gamma_ratio(n, prefix, x) } -> std::convertible_to<double>;
    };

/// Proposals q_n(x_{1:n-1}, x_n); the prefix is empty at n = 1.
template <class Q, class Block>
concept proposal_family = requires(const Q& q, std::size_t n, const path<Block>& prefix,
                                   const Block& x, engine& rng) {
  { q.sample(n, prefix, rng) } -> std::convertible_to<Block>;
  { q.log_density(n, prefix, x) } -> std::convertible_to<double>;
};

/// Proposals whose incremental weight can depend on the prefix only (the
/// conditional-of-the-target proposal). log_prefix_weight returns log w_n.
template <class Q, class Block>
concept prefix_weighted_proposal =
    proposal_family<Q, Block> && requires(const Q& q, std::size_t n, const path<Block>& prefix) {
      { q.weight_independent_of_last(n) } -> std::convertible_to<bool>;
      { q.log_prefix_weight(n, prefix) } -> std::convertible_to<double>;
    };

/// A model is markovian when gamma_n/gamma_{n-1} and q_n only look at
/// (x_{n-1}, x_n); such models can run with marginal-only storage.
template <class T>
constexpr bool is_markovian() {
  if constexpr (requires { T::markovian; }) {
    return T::markovian;
  } else {
    return false;
  }
}

template <class Q, class Block>
bool weight_is_prefix_only(const Q& q, std::size_t n) {
  if constexpr (prefix_weighted_proposal<Q, Block>) {
    return q.weight_independent_of_last(n);
  } else {
    return false;
  }
}

inline void check_level(std::size_t n, std::size_t horizon) {
  if (n < 1 || n > horizon) throw level_out_of_range(n, horizon);
}

/// log w_n(prefix, x): log gamma_1/q_1 at n = 1, log gamma_n/(gamma_{n-1} q_n)
/// otherwise, all in log domain. A candidate outside S_n gets -inf (certain
/// rejection); a prefix outside S_{n-1} or a zero proposal density throws.
template <target_sequence T, class Q>
double log_weight(const T& targets, const Q& proposals, std::size_t n,
                  const path<typename T::block_type>& prefix,
                  const typename T::block_type& x) {
  using Block = typename T::block_type;
  check_level(n, targets.horizon());
  if (prefix.length() + 1 != n) {
    throw error("prefix of length " + std::to_string(prefix.length()) +
                " at level " + std::to_string(n));
  }
  if constexpr (prefix_weighted_proposal<Q, Block>) {
    if (proposals.weight_independent_of_last(n)) {
      const double lw = proposals.log_prefix_weight(n, prefix);
      if (std::isnan(lw)) throw out_of_support("prefix weight undefined");
      return lw;
    }
  }
  const double lq = proposals.log_density(n, prefix, x);
  if (!(lq > neg_inf)) throw out_of_support("proposal density is zero");

  double ratio;
  if constexpr (incremental_target<T>) {
    ratio = targets.log_gamma_ratio(n, prefix, x);
  } else {
    const double previous = n > 1 ? targets.log_gamma(n - 1, prefix) : 0.0;
    if (!(previous > neg_inf)) throw out_of_support("prefix outside the previous support");
    const auto head = n > 1 ? std::make_shared<const path<Block>>(prefix) : nullptr;
    ratio = targets.log_gamma(n, path<Block>::extend(head, x)) - previous;
  }
  if (std::isnan(ratio)) throw out_of_support("target ratio undefined");
  if (ratio == neg_inf) return neg_inf;
  return ratio - lq;
}

template <target_sequence T, class Q>
double log_weight(const T& targets, const Q& proposals, std::size_t n,
                  const path<typename T::block_type>& full) {
  if (full.length() != n) {
    throw error("path of length " + std::to_string(full.length()) + " at level " +
                std::to_string(n));
  }
  return log_weight(targets, proposals, n, full.prefix(), full.last());
}

/// 1 ^ exp(proposed - current). The exponent is never positive when exp is
/// taken, so this cannot overflow.
inline double acceptance_ratio(double lw_proposed, double lw_current) {
  const double d = lw_proposed - lw_current;
  if (std::isnan(d)) return 0.0;
  if (d >= 0.0) return 1.0;
  return std::exp(d);
}

template <target_sequence T>
bool check_support(const T& targets, std::size_t n,
                   const path<typename T::block_type>& p) {
  check_level(n, targets.horizon());
  if (p.length() != n) {
    throw error("path of length " + std::to_string(p.length()) + " at level " +
                std::to_string(n));
  }
  return targets.log_gamma(n, p) > neg_inf;
}

/// Running maximum of observed weights per level, with optional declared
/// bounds. Advisory: a violation is flagged, never thrown.
class weight_bound_diagnostic {
 public:
  weight_bound_diagnostic() = default;
  explicit weight_bound_diagnostic(std::size_t horizon)
      : max_(horizon, 0.0), bound_(horizon), violated_(horizon, false) {}

  void declare_bound(std::size_t n, double bound) {
    check_level(n, max_.size());
    bound_[n - 1] = bound;
    if (max_[n - 1] > bound) violated_[n - 1] = true;
  }

  void observe(std::size_t n, double w) {
    check_level(n, max_.size());
    if (w > max_[n - 1]) max_[n - 1] = w;
    if (bound_[n - 1] && w > *bound_[n - 1]) violated_[n - 1] = true;
  }

  void observe_log(std::size_t n, double lw) { observe(n, std::exp(lw)); }

  double running_max(std::size_t n) const { return max_.at(n - 1); }
  std::optional<double> declared_bound(std::size_t n) const { return bound_.at(n - 1); }
  bool violated(std::size_t n) const { return violated_.at(n - 1); }
  bool any_violation() const {
    for (bool v : violated_)
      if (v) return true;
    return false;
  }
  std::size_t horizon() const { return max_.size(); }

 private:
  std::vector<double> max_;
  std::vector<std::optional<double>> bound_;
  std::vector<bool> violated_;
};

}  // namespace simcmc
