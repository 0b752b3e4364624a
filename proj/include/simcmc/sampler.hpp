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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "simcmc/errors.hpp"
#include "simcmc/path.hpp"
#include "simcmc/reservoir.hpp"
#include "simcmc/rng.hpp"
#include "simcmc/serialization.hpp"
#include "simcmc/target_model.hpp"

namespace simcmc {

enum class interaction {
  /// Level n proposes from level n-1's reservoir including this iteration's state.
  sequential,
  /// Level n only reads what level n-1 published up to the previous iteration,
  /// so all levels of one iteration can run concurrently.
  parallel_lagged,
};

inline const char* to_string(interaction m) {
  return m == interaction::sequential ? "sequential" : "parallel-lagged";
}

struct simcmc_options {
  std::uint64_t seed = 0;
  /// B in the reporting window l(i, B). 0 keeps every sample.
  std::size_t burn_in = 0;
  interaction mode = interaction::sequential;
  /// Unset selects marginal-only storage for markovian models.
  std::optional<storage_mode> storage;
  /// Also restrict the proposal reservoir to the burn-in window.
  bool window_proposals = false;
  /// With prefix-only weights, decide acceptance before drawing the block.
  bool accept_before_sample = true;
  bool track_weight_bounds = false;
};

struct norm_const_estimates {
  /// log Z_1-hat, then log (Z_n / Z_{n-1})-hat.
  std::vector<double> log_ratio;
  /// Chained log Z_n-hat.
  std::vector<double> log_z;
};

/**
 * Sequentially interacting MCMC over a target sequence gamma_1..gamma_P.
 *
 * Level 1 is an independence Metropolis-Hastings chain with proposal q_1.
 * Level n >= 2 proposes a prefix drawn uniformly from level n-1's reservoir,
 * extends it with q_n and accepts with probability 1 ^ w_n(new)/w_n(current).
 * Each candidate's weight feeds the normalizing-constant estimator whether or
 * not it is accepted.
 *
 * The targets and proposals are held by reference and must outlive the sampler.
 * Random draws for the update that creates reservoir entry u of level n come
 * from substreams keyed on (seed, n, u), so a run is a pure function of its
 * seed and the sequence of sweep/accrue calls.
 */
template <target_sequence T, proposal_family<typename T::block_type> Q>
class simcmc_sampler {
 public:
  using block_type = typename T::block_type;
  using path_type = path<block_type>;
  using pointer = typename path_type::pointer;

  /// initial[n-1] is X_n^(0), a complete path of length n inside S_n.
  simcmc_sampler(const T& targets, const Q& proposals, const std::vector<pointer>& initial,
                 simcmc_options options = {})
      : simcmc_sampler(targets, proposals, options) {
    if (initial.size() != horizon_) {
      throw error("expected " + std::to_string(horizon_) + " initial paths, got " +
                  std::to_string(initial.size()));
    }
    for (std::size_t n = 1; n <= horizon_; ++n) {
      seed_level(n, std::vector<pointer>{initial[n - 1]});
    }
  }

  /// Nested initialization: X_n^(0) is the length-n prefix of one full path.
  static simcmc_sampler nested(const T& targets, const Q& proposals, const pointer& full,
                               simcmc_options options = {}) {
    return simcmc_sampler(targets, proposals, nested_prefixes<block_type>(full), options);
  }

  /// Seeds every level's reservoir with an unweighted population (for example
  /// resampled SMC particles). The last member of each population becomes
  /// the current state.
  static simcmc_sampler from_population(const T& targets, const Q& proposals,
                                        const std::vector<std::vector<pointer>>& populations,
                                        simcmc_options options = {}) {
    simcmc_sampler s(targets, proposals, options);
    if (populations.size() != s.horizon_) throw error("one population per level required");
    for (std::size_t n = 1; n <= s.horizon_; ++n) s.seed_level(n, populations[n - 1]);
    return s;
  }

  std::size_t horizon() const { return horizon_; }
  std::size_t iteration() const { return iteration_; }
  storage_mode storage() const { return storage_; }
  const simcmc_options& options() const { return options_; }

  /// Levels 1..frontier take part in sweeps. Defaults to the horizon.
  std::size_t frontier() const { return frontier_; }
  void set_frontier(std::size_t n) {
    check_level(n, horizon_);
    frontier_ = n;
  }

  /// One iteration: update level 1, then levels 2..frontier in order.
  void sweep() {
    ++iteration_;
    for (std::size_t n = 1; n <= frontier_; ++n) update_level(n);
  }

  void run(std::size_t iterations) {
    for (std::size_t k = 0; k < iterations; ++k) sweep();
  }

  /// Adds `rounds` updates to each of levels first..last (in order per round),
  /// leaving every other level untouched. Used to spend spare computation on
  /// the most recent targets between observation arrivals.
  void accrue(std::size_t first, std::size_t last, std::size_t rounds) {
    check_level(first, frontier_);
    check_level(last, frontier_);
    if (first > last) throw error("accrue: empty level range");
    if (options_.mode != interaction::sequential) {
      throw error("accrue requires sequential interaction");
    }
    for (std::size_t r = 0; r < rounds; ++r) {
      for (std::size_t n = first; n <= last; ++n) update_level(n);
    }
  }

  const chain_reservoir<block_type>& reservoir(std::size_t n) const {
    check_level(n, horizon_);
    return levels_[n - 1].reservoir;
  }

  const norm_const_accumulator& accumulator(std::size_t n) const {
    check_level(n, horizon_);
    return levels_[n - 1].accumulator;
  }

  double current_log_weight(std::size_t n) const {
    check_level(n, horizon_);
    return levels_[n - 1].current_lw;
  }

  /// Average of f over reservoir entries l(i, B)..i of level n.
  template <class F>
  double empirical_expectation(std::size_t n, F&& f) const {
    const auto& r = reservoir(n);
    const std::size_t last = r.size() - 1;
    const std::size_t first = window_start(last, options_.burn_in);
    double sum = 0.0;
    for (std::size_t m = first; m <= last; ++m) {
      sum += r.visit(m, [&](const path_type& p) { return static_cast<double>(f(p)); });
    }
    return sum / static_cast<double>(last - first + 1);
  }

  norm_const_estimates estimates() const {
    norm_const_estimates out;
    double chained = 0.0;
    for (std::size_t n = 1; n <= frontier_; ++n) {
      const double r = levels_[n - 1].accumulator.log_estimate();
      chained += r;
      out.log_ratio.push_back(r);
      out.log_z.push_back(chained);
    }
    return out;
  }

  std::vector<double> acceptance_rates() const {
    std::vector<double> out;
    for (std::size_t n = 1; n <= frontier_; ++n) {
      const auto& l = levels_[n - 1];
      out.push_back(l.proposed == 0 ? 0.0
                                    : static_cast<double>(l.accepted) /
                                          static_cast<double>(l.proposed));
    }
    return out;
  }

  std::size_t accepted(std::size_t n) const { return levels_.at(n - 1).accepted; }
  std::size_t proposed(std::size_t n) const { return levels_.at(n - 1).proposed; }

  const weight_bound_diagnostic& weight_bounds() const { return bounds_; }
  void declare_weight_bound(std::size_t n, double bound) { bounds_.declare_bound(n, bound); }

  /// Complete dump of the sampler state. Resuming from it and continuing
  /// gives the same reservoirs, bit for bit, as never having stopped.
  json checkpoint() const {
    json j;
    j["format"] = "simcmc-checkpoint";
    j["version"] = 1;
    j["horizon"] = horizon_;
    j["storage"] = to_string(storage_);
    j["interaction"] = to_string(options_.mode);
    j["seed"] = options_.seed;
    j["burn_in"] = options_.burn_in;
    j["window_proposals"] = options_.window_proposals;
    j["accept_before_sample"] = options_.accept_before_sample;
    j["track_weight_bounds"] = options_.track_weight_bounds;
    j["iteration"] = iteration_;
    j["frontier"] = frontier_;

    std::unordered_map<const path_type*, std::size_t> ids;
    json nodes = json::array();
    auto node_id = [&](const pointer& p, auto&& self) -> std::int64_t {
      if (!p) return -1;
      if (auto it = ids.find(p.get()); it != ids.end()) return static_cast<std::int64_t>(it->second);
      const std::int64_t parent = self(p->prefix_pointer(), self);
      const std::size_t id = nodes.size();
      nodes.push_back(json::array({parent, p->last()}));
      ids.emplace(p.get(), id);
      return static_cast<std::int64_t>(id);
    };

    json levels = json::array();
    for (const auto& l : levels_) {
      json lj;
      lj["current_log_weight"] = encode_double(l.current_lw);
      lj["accepted"] = l.accepted;
      lj["proposed"] = l.proposed;
      lj["log_weight_sum"] = encode_double(l.accumulator.log_sum());
      lj["weight_count"] = l.accumulator.count();
      json entries = json::array();
      if (storage_ == storage_mode::full_path) {
        for (const auto& p : l.reservoir.paths()) entries.push_back(node_id(p, node_id));
      } else {
        for (const auto& b : l.reservoir.blocks()) entries.push_back(b);
      }
      lj["entries"] = std::move(entries);
      levels.push_back(std::move(lj));
    }
    j["levels"] = std::move(levels);
    if (storage_ == storage_mode::full_path) j["nodes"] = std::move(nodes);
    if (options_.track_weight_bounds) {
      json wb = json::array();
      for (std::size_t n = 1; n <= horizon_; ++n) {
        json b;
        b["max"] = bounds_.running_max(n);
        if (auto d = bounds_.declared_bound(n)) b["declared"] = *d;
        wb.push_back(b);
      }
      j["weight_bounds"] = std::move(wb);
    }
    return j;
  }

  static simcmc_sampler resume(const T& targets, const Q& proposals, const json& j) {
    if (j.at("format") != "simcmc-checkpoint" || j.at("version") != 1) {
      throw error("not a simcmc checkpoint");
    }
    simcmc_options o;
    o.seed = j.at("seed").get<std::uint64_t>();
    o.burn_in = j.at("burn_in").get<std::size_t>();
    o.mode = j.at("interaction") == "sequential" ? interaction::sequential
                                                 : interaction::parallel_lagged;
    o.storage = j.at("storage") == "full-path" ? storage_mode::full_path
                                               : storage_mode::marginal_only;
    o.window_proposals = j.at("window_proposals").get<bool>();
    o.accept_before_sample = j.at("accept_before_sample").get<bool>();
    o.track_weight_bounds = j.at("track_weight_bounds").get<bool>();
    simcmc_sampler s(targets, proposals, o);
    if (j.at("horizon").get<std::size_t>() != s.horizon_) {
      throw error("checkpoint horizon does not match the target sequence");
    }
    s.iteration_ = j.at("iteration").get<std::size_t>();
    s.frontier_ = j.at("frontier").get<std::size_t>();

    std::vector<pointer> nodes;
    if (s.storage_ == storage_mode::full_path) {
      for (const auto& nj : j.at("nodes")) {
        const auto parent = nj.at(0).get<std::int64_t>();
        nodes.push_back(path_type::make(parent < 0 ? nullptr : nodes.at(static_cast<std::size_t>(parent)),
                                        nj.at(1).get<block_type>()));
      }
    }
    const auto& levels = j.at("levels");
    for (std::size_t n = 1; n <= s.horizon_; ++n) {
      const auto& lj = levels.at(n - 1);
      auto& l = s.levels_[n - 1];
      l.current_lw = decode_double(lj.at("current_log_weight"));
      l.accepted = lj.at("accepted").get<std::size_t>();
      l.proposed = lj.at("proposed").get<std::size_t>();
      l.accumulator = norm_const_accumulator::restore(decode_double(lj.at("log_weight_sum")),
                                                      lj.at("weight_count").get<std::size_t>());
      for (const auto& e : lj.at("entries")) {
        if (s.storage_ == storage_mode::full_path) {
          l.reservoir.push(nodes.at(e.get<std::size_t>()));
        } else {
          l.reservoir.push_block(e.get<block_type>());
        }
      }
    }
    if (o.track_weight_bounds && j.contains("weight_bounds")) {
      std::size_t n = 1;
      for (const auto& b : j.at("weight_bounds")) {
        s.bounds_.observe(n, b.at("max").get<double>());
        if (b.contains("declared")) s.bounds_.declare_bound(n, b.at("declared").get<double>());
        ++n;
      }
    }
    return s;
  }

 private:
  struct level_state {
    chain_reservoir<block_type> reservoir;
    norm_const_accumulator accumulator;
    double current_lw = neg_inf;
    std::size_t accepted = 0;
    std::size_t proposed = 0;
  };

  simcmc_sampler(const T& targets, const Q& proposals, simcmc_options options)
      : targets_(&targets), proposals_(&proposals), options_(options),
        horizon_(targets.horizon()), frontier_(targets.horizon()) {
    constexpr bool markovian = is_markovian<T>() && is_markovian<Q>();
    storage_ = options_.storage.value_or(markovian ? storage_mode::marginal_only
                                                   : storage_mode::full_path);
    if (storage_ == storage_mode::marginal_only && !markovian) {
      throw mode_mismatch("marginal-only storage needs a markovian model");
    }
    if (horizon_ == 0) throw error("empty target sequence");
    levels_.reserve(horizon_);
    for (std::size_t n = 1; n <= horizon_; ++n) {
      levels_.push_back(level_state{chain_reservoir<block_type>(n, storage_), {}, neg_inf, 0, 0});
    }
    if (options_.track_weight_bounds) bounds_ = weight_bound_diagnostic(horizon_);
  }

  void seed_level(std::size_t n, const std::vector<pointer>& states) {
    if (states.empty()) throw error("empty population at level " + std::to_string(n));
    auto& l = levels_[n - 1];
    for (const auto& p : states) {
      if (!p || p->length() != n || !p->complete()) throw init_out_of_support(n);
      double lw;
      try {
        if (!check_support(*targets_, n, *p)) throw init_out_of_support(n);
        lw = log_weight(*targets_, *proposals_, n, *p);
      } catch (const out_of_support&) {
        throw init_out_of_support(n);
      }
      if (!(lw > neg_inf)) throw init_out_of_support(n);
      l.reservoir.push(p);
      l.current_lw = lw;
    }
  }

  void update_level(std::size_t n) {
    auto& l = levels_[n - 1];
    const std::size_t u = l.reservoir.size();
    engine select = engine::keyed(options_.seed, n, u, stream::select);
    engine propose = engine::keyed(options_.seed, n, u, stream::propose);
    engine accept = engine::keyed(options_.seed, n, u, stream::accept);

    std::size_t j = 0;
    if (n > 1) {
      const auto& below = levels_[n - 2].reservoir;
      std::size_t hi = below.size();
      if (options_.mode == interaction::parallel_lagged) hi = std::min(hi, u);
      const std::size_t lo = options_.window_proposals ? window_start(hi - 1, options_.burn_in) : 0;
      j = chain_reservoir<block_type>::draw(select, lo, hi);
    }

    const bool prefix_only = weight_is_prefix_only<Q, block_type>(*proposals_, n);
    auto step = [&](const path_type& prefix) {
      double lw;
      std::optional<block_type> x;
      bool accepted;
      if (prefix_only && options_.accept_before_sample) {
        lw = log_weight_before_sampling(n, prefix);
        accepted = accept.uniform() < acceptance_ratio(lw, l.current_lw);
        if (accepted) x = proposals_->sample(n, prefix, propose);
      } else {
        x = proposals_->sample(n, prefix, propose);
        lw = log_weight(*targets_, *proposals_, n, prefix, *x);
        accepted = accept.uniform() < acceptance_ratio(lw, l.current_lw);
      }
      l.accumulator.push(lw);
      ++l.proposed;
      if (options_.track_weight_bounds) bounds_.observe_log(n, lw);
      if (!accepted) {
        l.reservoir.repeat_last();
        return;
      }
      ++l.accepted;
      l.current_lw = lw;
      if (storage_ == storage_mode::full_path) {
        pointer head = n > 1 ? levels_[n - 2].reservoir.pointer_at(j) : nullptr;
        l.reservoir.push(path_type::make(std::move(head), std::move(*x)));
      } else {
        l.reservoir.push_block(*x);
      }
    };

    if (n == 1) {
      step(path_type::empty_path());
    } else if (storage_ == storage_mode::full_path) {
      step(*levels_[n - 2].reservoir.pointer_at(j));
    } else {
      step(path_type::marginal(levels_[n - 2].reservoir.block_at(j), n - 1));
    }
  }

  double log_weight_before_sampling(std::size_t n, const path_type& prefix) const {
    if constexpr (prefix_weighted_proposal<Q, block_type>) {
      return proposals_->log_prefix_weight(n, prefix);
    } else {
      return neg_inf;
    }
  }

  const T* targets_;
  const Q* proposals_;
  simcmc_options options_;
  std::size_t horizon_;
  std::size_t frontier_;
  storage_mode storage_ = storage_mode::full_path;
  std::size_t iteration_ = 0;
  std::vector<level_state> levels_;
  weight_bound_diagnostic bounds_;
};

}  // namespace simcmc
