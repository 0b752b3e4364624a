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
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "simcmc/errors.hpp"
#include "simcmc/serialization.hpp"

namespace simcmc::harness {

/// Assertions evaluated by `--check`. Unset fields are not checked.
struct check_spec {
  /// RMSE at the largest N of every SIMCMC arm must not exceed this.
  std::optional<double> max_rmse_at_largest;
  /// RMSE at the smallest N of every SIMCMC arm must fall in this range.
  std::optional<std::pair<double, double>> rmse_range_at_smallest;
  /// RMSE at the largest N below RMSE at the smallest N.
  bool rmse_decreases = false;
  /// Sign-mass check against the reference (Kitagawa).
  bool sign_bimodality = false;
  /// Tracking: one-sided sign test level for SIMCMC beating SMC-N.
  std::optional<double> sign_test_alpha;
};

struct experiment_config {
  std::string model = "linear-gaussian";  ///< linear-gaussian | kitagawa | tracking
  std::size_t horizon = 100;
  std::uint64_t data_seed = 1;
  std::optional<std::string> dataset;  ///< load observations instead of simulating

  // linear-gaussian
  std::size_t dimension = 2;
  double sigma_v = 2.0;
  double sigma_w = 0.5;
  std::uint64_t matrix_seed = 1;

  // kitagawa
  double var_v = 5.0;
  double var_w = 5.0;
  double initial_var = 5.0;
  std::size_t reference_runs = 1;
  /// Particles of the reference SMC (Kitagawa likelihood, tracking filter means).
  std::size_t reference_particles = 100000;

  // tracking
  double noise_scale = 5.0;
  double bearing_var = 1e-2;
  double observe_probability = 0.25;
  std::size_t grid = 4;
  double initial_cov_scale = 1.0;
  std::size_t budget = 250;
  std::size_t lag = 1;
  std::size_t n_prime_factor = 4;
  std::vector<std::string> arms{"smc-n", "smc-n-prime", "simcmc"};

  // sampling
  std::vector<std::string> algorithms{"simcmc", "smc"};  ///< simcmc | simcmc-parallel | smc
  std::string proposal = "prior";                        ///< prior | optimal
  std::vector<std::size_t> sample_counts{1000};
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  std::size_t burn_in = 0;
  std::optional<std::string> output;

  check_spec checks;

  void validate() const {
    static const std::set<std::string> models{"linear-gaussian", "kitagawa", "tracking"};
    if (!models.count(model)) throw config_error("model", "unknown model '" + model + "'");
    if (horizon == 0) throw config_error("horizon", "must be positive");
    if (replications == 0) throw config_error("replications", "must be positive");
    if (model == "linear-gaussian") {
      if (dimension == 0) throw config_error("dimension", "must be positive");
      if (!(sigma_v > 0.0)) throw config_error("sigma_v", "must be positive");
      if (!(sigma_w > 0.0)) throw config_error("sigma_w", "must be positive");
    }
    if (model == "kitagawa") {
      if (!(var_v > 0.0)) throw config_error("var_v", "must be positive");
      if (!(var_w > 0.0)) throw config_error("var_w", "must be positive");
      if (!(initial_var > 0.0)) throw config_error("initial_var", "must be positive");
      if (reference_runs == 0) throw config_error("reference_runs", "must be positive");
      if (proposal != "prior") throw config_error("proposal", "kitagawa supports only the prior proposal");
    }
    if (model != "linear-gaussian" && reference_particles == 0) {
      throw config_error("reference_particles", "must be positive");
    }
    if (model == "tracking") {
      if (!(noise_scale > 0.0)) throw config_error("noise_scale", "must be positive");
      if (!(bearing_var > 0.0)) throw config_error("bearing_var", "must be positive");
      if (observe_probability < 0.0 || observe_probability > 1.0) {
        throw config_error("observe_probability", "must lie in [0, 1]");
      }
      if (grid == 0) throw config_error("grid", "must be positive");
      if (!(initial_cov_scale > 0.0)) throw config_error("initial_cov_scale", "must be positive");
      if (budget == 0) throw config_error("budget", "must be positive");
      if (lag == 0) throw config_error("lag", "must be positive");
      if (n_prime_factor == 0) throw config_error("n_prime_factor", "must be positive");
      static const std::set<std::string> known{"smc-n", "smc-n-prime", "simcmc"};
      if (arms.empty()) throw config_error("arms", "must not be empty");
      for (const auto& a : arms) {
        if (!known.count(a)) throw config_error("arms", "unknown arm '" + a + "'");
      }
      if (checks.sign_test_alpha &&
          (std::find(arms.begin(), arms.end(), "simcmc") == arms.end() ||
           std::find(arms.begin(), arms.end(), "smc-n") == arms.end())) {
        throw config_error("checks.sign_test_alpha", "needs the simcmc and smc-n arms");
      }
      if (proposal != "prior") throw config_error("proposal", "tracking supports only the prior proposal");
    } else {
      static const std::set<std::string> known{"simcmc", "simcmc-parallel", "smc"};
      if (algorithms.empty()) throw config_error("algorithms", "must not be empty");
      for (const auto& a : algorithms) {
        if (!known.count(a)) throw config_error("algorithms", "unknown algorithm '" + a + "'");
      }
      if (sample_counts.empty()) throw config_error("sample_counts", "must not be empty");
      for (auto n : sample_counts) {
        if (n == 0) throw config_error("sample_counts", "all counts must be positive");
      }
    }
    if (proposal != "prior" && proposal != "optimal") {
      throw config_error("proposal", "must be 'prior' or 'optimal'");
    }
  }
};

namespace detail {

template <class V>
void read(const json& j, const char* key, V& out, std::set<std::string>& seen) {
  seen.insert(key);
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<V>();
  } catch (const json::exception& e) {
    throw config_error(key, std::string("wrong type: ") + e.what());
  }
}

inline void read_seed(const json& j, const char* key, std::uint64_t& out, std::set<std::string>& seen) {
  seen.insert(key);
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) throw config_error(key, "must be a non-negative integer");
  out = v.get<std::uint64_t>();
}

inline void read_count(const json& j, const char* key, std::size_t& out, std::set<std::string>& seen) {
  seen.insert(key);
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) throw config_error(key, "must be a non-negative integer");
  out = v.get<std::size_t>();
}

}  // namespace detail

inline void to_json(json& j, const check_spec& c) {
  j = json::object();
  if (c.max_rmse_at_largest) j["max_rmse_at_largest"] = *c.max_rmse_at_largest;
  if (c.rmse_range_at_smallest) {
    j["rmse_range_at_smallest"] = {c.rmse_range_at_smallest->first, c.rmse_range_at_smallest->second};
  }
  if (c.rmse_decreases) j["rmse_decreases"] = true;
  if (c.sign_bimodality) j["sign_bimodality"] = true;
  if (c.sign_test_alpha) j["sign_test_alpha"] = *c.sign_test_alpha;
}

inline void to_json(json& j, const experiment_config& c) {
  j = json::object();
  j["model"] = c.model;
  j["horizon"] = c.horizon;
  j["data_seed"] = c.data_seed;
  if (c.dataset) j["dataset"] = *c.dataset;
  if (c.model == "linear-gaussian") {
    j["dimension"] = c.dimension;
    j["sigma_v"] = c.sigma_v;
    j["sigma_w"] = c.sigma_w;
    j["matrix_seed"] = c.matrix_seed;
  } else if (c.model == "kitagawa") {
    j["var_v"] = c.var_v;
    j["var_w"] = c.var_w;
    j["initial_var"] = c.initial_var;
    j["reference_particles"] = c.reference_particles;
    j["reference_runs"] = c.reference_runs;
  } else {
    j["reference_particles"] = c.reference_particles;
    j["noise_scale"] = c.noise_scale;
    j["bearing_var"] = c.bearing_var;
    j["observe_probability"] = c.observe_probability;
    j["grid"] = c.grid;
    j["initial_cov_scale"] = c.initial_cov_scale;
    j["budget"] = c.budget;
    j["lag"] = c.lag;
    j["n_prime_factor"] = c.n_prime_factor;
    j["arms"] = c.arms;
  }
  if (c.model != "tracking") {
    j["algorithms"] = c.algorithms;
    j["sample_counts"] = c.sample_counts;
  }
  j["proposal"] = c.proposal;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["burn_in"] = c.burn_in;
  if (c.output) j["output"] = *c.output;
  json checks;
  to_json(checks, c.checks);
  if (!checks.empty()) j["checks"] = checks;
}

/// Parses and validates. Unknown keys are errors so typos do not pass silently.
inline experiment_config parse_config(const json& j) {
  if (!j.is_object()) throw config_error("<root>", "config must be a JSON object");
  experiment_config c;
  std::set<std::string> seen;
  using detail::read;
  using detail::read_count;
  using detail::read_seed;
  read(j, "model", c.model, seen);
  read_count(j, "horizon", c.horizon, seen);
  read_seed(j, "data_seed", c.data_seed, seen);
  seen.insert("dataset");
  if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
  read_count(j, "dimension", c.dimension, seen);
  read(j, "sigma_v", c.sigma_v, seen);
  read(j, "sigma_w", c.sigma_w, seen);
  read_seed(j, "matrix_seed", c.matrix_seed, seen);
  read(j, "var_v", c.var_v, seen);
  read(j, "var_w", c.var_w, seen);
  read(j, "initial_var", c.initial_var, seen);
  read_count(j, "reference_particles", c.reference_particles, seen);
  read_count(j, "reference_runs", c.reference_runs, seen);
  read(j, "noise_scale", c.noise_scale, seen);
  read(j, "bearing_var", c.bearing_var, seen);
  read(j, "observe_probability", c.observe_probability, seen);
  read_count(j, "grid", c.grid, seen);
  read(j, "initial_cov_scale", c.initial_cov_scale, seen);
  read_count(j, "budget", c.budget, seen);
  read_count(j, "lag", c.lag, seen);
  read_count(j, "n_prime_factor", c.n_prime_factor, seen);
  read(j, "arms", c.arms, seen);
  read(j, "algorithms", c.algorithms, seen);
  read(j, "proposal", c.proposal, seen);
  read(j, "sample_counts", c.sample_counts, seen);
  read_count(j, "replications", c.replications, seen);
  read_seed(j, "seed", c.seed, seen);
  read_count(j, "burn_in", c.burn_in, seen);
  seen.insert("output");
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  seen.insert("checks");
  if (j.contains("checks")) {
    const auto& cj = j.at("checks");
    if (!cj.is_object()) throw config_error("checks", "must be an object");
    for (const auto& [key, value] : cj.items()) {
      try {
        if (key == "max_rmse_at_largest") {
          c.checks.max_rmse_at_largest = value.get<double>();
        } else if (key == "rmse_range_at_smallest") {
          if (value.size() != 2) throw config_error("checks.rmse_range_at_smallest", "needs [low, high]");
          c.checks.rmse_range_at_smallest = {value.at(0).get<double>(), value.at(1).get<double>()};
        } else if (key == "rmse_decreases") {
          c.checks.rmse_decreases = value.get<bool>();
        } else if (key == "sign_bimodality") {
          c.checks.sign_bimodality = value.get<bool>();
        } else if (key == "sign_test_alpha") {
          c.checks.sign_test_alpha = value.get<double>();
        } else {
          throw config_error("checks." + key, "unknown check");
        }
      } catch (const json::exception& e) {
        throw config_error("checks." + key, std::string("wrong type: ") + e.what());
      }
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (!seen.count(key)) throw config_error(key, "unknown field");
  }
  c.validate();
  return c;
}

inline experiment_config load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw config_error("<file>", "cannot open " + file);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("<file>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Canonical text form: sorted keys, fixed formatting.
inline std::string canonical(const experiment_config& c) {
  json j;
  to_json(j, c);
  return j.dump();
}

inline std::string config_hash(const experiment_config& c) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << fnv1a(canonical(c));
  return s.str();
}

}  // namespace simcmc::harness
