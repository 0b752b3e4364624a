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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "simcmc/errors.hpp"
#include "simcmc/log_domain.hpp"
#include "simcmc/path.hpp"
#include "simcmc/rng.hpp"

namespace simcmc {

enum class storage_mode { full_path, marginal_only };

inline const char* to_string(storage_mode m) {
  return m == storage_mode::full_path ? "full-path" : "marginal-only";
}

/// First index of the reporting window at iteration i: 0 v ((i - B) ^ B).
inline std::size_t window_start(std::size_t i, std::size_t burn_in) {
  if (i <= burn_in) return 0;
  return std::min(i - burn_in, burn_in);
}

/**
 * The accepted states X_n^(0..i) of one level, i.e. the atoms of the empirical
 * measure. Full-path mode keeps shared pointers to whole paths; marginal-only
 * mode keeps the last block of each state.
 */
template <class Block>
class chain_reservoir {
 public:
  using path_type = path<Block>;
  using pointer = typename path_type::pointer;

  chain_reservoir(std::size_t level, storage_mode mode) : level_(level), mode_(mode) {}

  std::size_t level() const { return level_; }
  storage_mode mode() const { return mode_; }
  std::size_t size() const {
    return mode_ == storage_mode::full_path ? paths_.size() : blocks_.size();
  }

  void reserve(std::size_t n) {
    if (mode_ == storage_mode::full_path) {
      paths_.reserve(n);
    } else {
      blocks_.reserve(n);
    }
  }

  void push(pointer p) {
    if (mode_ == storage_mode::full_path) {
      paths_.push_back(std::move(p));
    } else {
      blocks_.push_back(p->last());
    }
  }

  void push_block(const Block& b) {
    if (mode_ == storage_mode::full_path) {
      throw mode_mismatch("full-path reservoir needs whole paths");
    }
    blocks_.push_back(b);
  }

  /// Appends another copy of the most recent state (a rejected move).
  void repeat_last() {
    if (mode_ == storage_mode::full_path) {
      paths_.push_back(paths_.back());
    } else {
      blocks_.push_back(blocks_.back());
    }
  }

  const Block& block_at(std::size_t m) const {
    return mode_ == storage_mode::full_path ? paths_.at(m)->last() : blocks_.at(m);
  }

  const pointer& pointer_at(std::size_t m) const {
    if (mode_ != storage_mode::full_path) {
      throw mode_mismatch("marginal-only reservoir stores no paths");
    }
    return paths_.at(m);
  }

  /// Calls f with entry m viewed as a path of length level().
  template <class F>
  decltype(auto) visit(std::size_t m, F&& f) const {
    if (mode_ == storage_mode::full_path) return f(*paths_.at(m));
    return f(path_type::marginal(blocks_.at(m), level_));
  }

  /// Index drawn uniformly from [lo, hi).
  static std::size_t draw(engine& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.below(hi - lo));
  }

  const std::vector<pointer>& paths() const { return paths_; }
  /// Stored blocks in marginal mode; empty in full-path mode (see last_blocks).
  const std::vector<Block>& blocks() const { return blocks_; }

  /// The last block of every entry, in either mode.
  std::vector<Block> last_blocks() const {
    if (mode_ == storage_mode::marginal_only) return blocks_;
    std::vector<Block> out;
    out.reserve(paths_.size());
    for (const auto& p : paths_) out.push_back(p->last());
    return out;
  }

 private:
  std::size_t level_;
  storage_mode mode_;
  std::vector<pointer> paths_;
  std::vector<Block> blocks_;
};

/// Running mean of the incremental weights of proposed candidates, kept as a
/// log-sum so long products of small likelihoods do not underflow.
class norm_const_accumulator {
 public:
  void push(double log_w) {
    log_sum_ = log_add_exp(log_sum_, log_w);
    ++count_;
  }

  std::size_t count() const { return count_; }
  double log_sum() const { return log_sum_; }

  double log_estimate() const {
    if (count_ == 0) throw no_proposals_yet();
    return log_sum_ - std::log(static_cast<double>(count_));
  }
  double estimate() const { return std::exp(log_estimate()); }

  static norm_const_accumulator restore(double log_sum, std::size_t count) {
    norm_const_accumulator a;
    a.log_sum_ = log_sum;
    a.count_ = count;
    return a;
  }

 private:
  double log_sum_ = neg_inf;
  std::size_t count_ = 0;
};

}  // namespace simcmc
