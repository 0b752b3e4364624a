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
#include <cstdint>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "simcmc/errors.hpp"

namespace simcmc {

using json = nlohmann::json;

/// JSON has no infinities; non-finite doubles are written as strings.
inline json encode_double(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline double decode_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  if (s == "nan") return std::nan("");
  throw error("not a number: " + s);
}

/// FNV-1a, used for config hashes that must be stable across platforms.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace simcmc

namespace nlohmann {

template <int Rows>
struct adl_serializer<Eigen::Matrix<double, Rows, 1>> {
  using vector_type = Eigen::Matrix<double, Rows, 1>;

  static void to_json(json& j, const vector_type& v) {
    j = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v[k]);
  }

  static void from_json(const json& j, vector_type& v) {
    if constexpr (Rows == Eigen::Dynamic) {
      v.resize(static_cast<Eigen::Index>(j.size()));
    } else if (j.size() != static_cast<std::size_t>(Rows)) {
      throw simcmc::error("vector of wrong size in JSON");
    }
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = j.at(static_cast<std::size_t>(k)).get<double>();
  }
};

}  // namespace nlohmann
