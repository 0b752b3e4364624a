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

// Simulated datasets as JSON documents carrying their seed and model spec.

#pragma once

#include <fstream>
#include <string>

#include "simcmc/errors.hpp"
#include "simcmc/models/state_space.hpp"
#include "simcmc/serialization.hpp"

namespace simcmc::harness {

template <class State, class Obs>
json dataset_to_json(const std::string& model, const json& spec,
                     const simulated_data<State, Obs>& data) {
  json j;
  j["format"] = "simcmc-dataset";
  j["version"] = 1;
  j["model"] = model;
  j["spec"] = spec;
  j["seed"] = data.seed;
  j["horizon"] = data.states.size();
  j["states"] = json::array();
  for (const auto& x : data.states) j["states"].push_back(x);
  j["observations"] = json::array();
  for (const auto& y : data.observations) {
    if (y) {
      j["observations"].push_back(*y);
    } else {
      j["observations"].push_back(nullptr);
    }
  }
  j["present"] = data.presence();
  return j;
}

template <class State, class Obs>
simulated_data<State, Obs> dataset_from_json(const json& j, const std::string& expected_model) {
  if (j.at("format") != "simcmc-dataset") throw error("not a simcmc dataset");
  if (j.at("model") != expected_model) {
    throw error("dataset is for model '" + j.at("model").get<std::string>() + "', expected '" +
                expected_model + "'");
  }
  simulated_data<State, Obs> d;
  d.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& x : j.at("states")) d.states.push_back(x.get<State>());
  for (const auto& y : j.at("observations")) {
    if (y.is_null()) {
      d.observations.emplace_back(std::nullopt);
    } else {
      d.observations.emplace_back(y.get<Obs>());
    }
  }
  if (d.states.size() != d.observations.size()) throw length_mismatch(d.states.size(), d.observations.size());
  return d;
}

inline void write_json_file(const std::string& file, const json& j, int indent = 2) {
  std::ofstream out(file);
  if (!out) throw error("cannot write " + file);
  out << j.dump(indent) << '\n';
}

inline json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw error("cannot open " + file);
  return json::parse(in);
}

}  // namespace simcmc::harness
