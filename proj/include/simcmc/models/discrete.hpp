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
#include <vector>

#include "simcmc/errors.hpp"
#include "simcmc/log_domain.hpp"
#include "simcmc/path.hpp"
#include "simcmc/rng.hpp"

namespace simcmc {

/**
 * Tabulated targets and proposals on E = {0..K-1}, levels 1..P.
 *
 * Paths are flattened row-major: x_{1:n} maps to
 * x_1 K^{n-1} + x_2 K^{n-2} + ... + x_n. gamma[n-1] has K^n entries,
 * q[n-1] has K^{n-1} rows of K entries (one row per prefix).
 */
class discrete_targets {
 public:
  using block_type = int;

  discrete_targets(std::size_t alphabet, std::vector<std::vector<double>> gamma,
                   std::vector<std::vector<double>> proposal)
      : k_(alphabet), gamma_(std::move(gamma)), q_(std::move(proposal)) {
    if (k_ == 0 || gamma_.empty() || gamma_.size() != q_.size()) {
      throw error("discrete_targets: inconsistent table counts");
    }
    std::size_t cells = 1;
    for (std::size_t n = 1; n <= gamma_.size(); ++n) {
      cells *= k_;
      if (gamma_[n - 1].size() != cells || q_[n - 1].size() != cells) {
        throw error("discrete_targets: table size mismatch at level " + std::to_string(n));
      }
      bool any = false;
      for (double g : gamma_[n - 1]) {
        if (g < 0.0) throw error("discrete_targets: negative gamma");
        any = any || g > 0.0;
      }
      if (!any) throw zero_mass(n);
      for (std::size_t row = 0; row < cells / k_; ++row) {
        double s = 0.0;
        for (std::size_t x = 0; x < k_; ++x) {
          const double v = q_[n - 1][row * k_ + x];
          if (v < 0.0) throw error("discrete_targets: negative proposal");
          s += v;
        }
        if (std::abs(s - 1.0) > 1e-12) throw error("discrete_targets: proposal row not normalized");
      }
    }
  }

  std::size_t horizon() const { return gamma_.size(); }
  std::size_t alphabet() const { return k_; }
  std::size_t cells(std::size_t n) const { return gamma_.at(n - 1).size(); }

  const std::vector<double>& gamma_table(std::size_t n) const { return gamma_.at(n - 1); }
  const std::vector<double>& proposal_table(std::size_t n) const { return q_.at(n - 1); }

  std::size_t index_of(const path<int>& p) const {
    std::size_t idx = 0;
    std::size_t scale = 1;
    const path<int>* node = &p;
    for (std::size_t k = p.length(); k > 0; --k) {
      idx += scale * static_cast<std::size_t>(node->last());
      scale *= k_;
      if (k > 1) node = &node->prefix();
    }
    return idx;
  }

  path<int>::pointer path_of(std::size_t n, std::size_t index) const {
    std::vector<int> blocks(n);
    for (std::size_t k = n; k > 0; --k) {
      blocks[k - 1] = static_cast<int>(index % k_);
      index /= k_;
    }
    return path<int>::from_blocks(blocks);
  }

  double log_gamma(std::size_t n, const path<int>& p) const {
    if (n == 0) return 0.0;
    return std::log(gamma_.at(n - 1).at(index_of(p)));
  }

  // Proposal side.

  int sample(std::size_t n, const path<int>& prefix, engine& rng) const {
    const std::size_t row = n > 1 ? index_of(prefix) : 0;
    const double* q = &q_.at(n - 1)[row * k_];
    const double u = rng.uniform();
    double c = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t x = 0; x < k_; ++x) {
      if (q[x] > 0.0) last_positive = x;
      c += q[x];
      if (u < c && q[x] > 0.0) return static_cast<int>(x);
    }
    return static_cast<int>(last_positive);
  }

  double log_density(std::size_t n, const path<int>& prefix, int x) const {
    const std::size_t row = n > 1 ? index_of(prefix) : 0;
    if (x < 0 || static_cast<std::size_t>(x) >= k_) return neg_inf;
    return std::log(q_.at(n - 1)[row * k_ + static_cast<std::size_t>(x)]);
  }

  /// Random instance with entries drawn in (0.05, 1.05); each gamma cell is
  /// zeroed with probability zero_fraction (keeping at least one positive).
  static discrete_targets random(std::size_t alphabet, std::size_t horizon,
                                 std::uint64_t seed, double zero_fraction = 0.0) {
    engine rng = engine::keyed(seed, alphabet, horizon, stream::instance);
    std::vector<std::vector<double>> gamma(horizon), q(horizon);
    std::size_t cells = 1;
    for (std::size_t n = 1; n <= horizon; ++n) {
      cells *= alphabet;
      gamma[n - 1].resize(cells);
      q[n - 1].resize(cells);
      bool any = false;
      for (std::size_t x = 0; x < cells; ++x) {
        auto& g = gamma[n - 1][x];
        g = rng.uniform() < zero_fraction ? 0.0 : 0.05 + rng.uniform();
        // Keep S_n inside S_{n-1} x E.
        if (n > 1 && gamma[n - 2][x / alphabet] == 0.0) g = 0.0;
        any = any || g > 0.0;
      }
      if (!any) {
        for (std::size_t x = 0; x < cells; ++x) {
          if (n == 1 || gamma[n - 2][x / alphabet] > 0.0) {
            gamma[n - 1][x] = 1.0;
            break;
          }
        }
      }
      for (std::size_t row = 0; row < cells / alphabet; ++row) {
        double s = 0.0;
        for (std::size_t x = 0; x < alphabet; ++x) {
          q[n - 1][row * alphabet + x] = 0.05 + rng.uniform();
          s += q[n - 1][row * alphabet + x];
        }
        for (std::size_t x = 0; x < alphabet; ++x) q[n - 1][row * alphabet + x] /= s;
      }
    }
    return discrete_targets(alphabet, std::move(gamma), std::move(q));
  }

 private:
  std::size_t k_;
  std::vector<std::vector<double>> gamma_;
  std::vector<std::vector<double>> q_;
};

/**
 * Proposes from the exact conditional pi_n(x_n | x_{1:n-1}) of a tabulated
 * sequence, so the incremental weight only depends on the prefix:
 * w_n = gamma_n(x_{1:n-1}) / gamma_{n-1}(x_{1:n-1}), with gamma_n(x_{1:n-1})
 * the sum of gamma_n over extensions.
 */
class discrete_optimal_proposal {
 public:
  explicit discrete_optimal_proposal(const discrete_targets& targets) : t_(&targets) {}

  bool weight_independent_of_last(std::size_t) const { return true; }

  double log_prefix_weight(std::size_t n, const path<int>& prefix) const {
    const double prev = n > 1 ? t_->log_gamma(n - 1, prefix) : 0.0;
    return std::log(extension_mass(n, prefix)) - prev;
  }

  int sample(std::size_t n, const path<int>& prefix, engine& rng) const {
    const double total = extension_mass(n, prefix);
    const std::size_t base = (n > 1 ? t_->index_of(prefix) : 0) * t_->alphabet();
    const auto& g = t_->gamma_table(n);
    const double u = rng.uniform() * total;
    double c = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t x = 0; x < t_->alphabet(); ++x) {
      if (g[base + x] > 0.0) last_positive = x;
      c += g[base + x];
      if (u < c && g[base + x] > 0.0) return static_cast<int>(x);
    }
    return static_cast<int>(last_positive);
  }

  double log_density(std::size_t n, const path<int>& prefix, int x) const {
    const std::size_t base = (n > 1 ? t_->index_of(prefix) : 0) * t_->alphabet();
    return std::log(t_->gamma_table(n)[base + static_cast<std::size_t>(x)] /
                    extension_mass(n, prefix));
  }

 private:
  double extension_mass(std::size_t n, const path<int>& prefix) const {
    const std::size_t base = (n > 1 ? t_->index_of(prefix) : 0) * t_->alphabet();
    double s = 0.0;
    for (std::size_t x = 0; x < t_->alphabet(); ++x) s += t_->gamma_table(n)[base + x];
    return s;
  }

  const discrete_targets* t_;
};

}  // namespace simcmc
