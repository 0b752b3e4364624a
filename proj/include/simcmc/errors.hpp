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
#include <stdexcept>
#include <string>

namespace simcmc {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class out_of_support : public error {
 public:
  using error::error;
};

class level_out_of_range : public error {
 public:
  level_out_of_range(std::size_t n, std::size_t horizon)
      : error("level " + std::to_string(n) + " outside 1.." +
              std::to_string(horizon)),
        level(n) {}
  std::size_t level;
};

class init_out_of_support : public error {
 public:
  explicit init_out_of_support(std::size_t n)
      : error("initial state at level " + std::to_string(n) +
              " lies outside the target support"),
        level(n) {}
  std::size_t level;
};

// Raised when a computation needs more of a path than marginal-only storage keeps.
class mode_mismatch : public error {
 public:
  using error::error;
};

class no_proposals_yet : public error {
 public:
  no_proposals_yet() : error("no proposals recorded yet (iteration 0)") {}
};

class degenerate_weights : public error {
 public:
  explicit degenerate_weights(std::size_t n)
      : error("all importance weights are zero at level " + std::to_string(n)),
        level(n) {}
  std::size_t level;
};

class bad_weights : public error {
 public:
  using error::error;
};

class numerical_failure : public error {
 public:
  using error::error;
};

class origin_bearing : public error {
 public:
  origin_bearing() : error("bearing undefined at the origin") {}
};

class zero_mass : public error {
 public:
  explicit zero_mass(std::size_t n)
      : error("target has zero total mass at level " + std::to_string(n)),
        level(n) {}
  std::size_t level;
};

class length_mismatch : public error {
 public:
  length_mismatch(std::size_t a, std::size_t b)
      : error("length mismatch: " + std::to_string(a) + " vs " +
              std::to_string(b)) {}
};

class config_error : public error {
 public:
  config_error(const std::string& field, const std::string& what)
      : error("config field '" + field + "': " + what), field(field) {}
  std::string field;
};

}  // namespace simcmc
