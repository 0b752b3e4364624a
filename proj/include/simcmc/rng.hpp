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

#include <cstdint>
#include <limits>

namespace simcmc {

/// What a random draw is used for. Each purpose gets its own substream so
/// that skipping one kind of draw never shifts another.
enum class stream : std::uint64_t {
  select = 1,
  propose = 2,
  accept = 3,
  resample = 4,
  simulate = 5,
  initialize = 6,
  instance = 7,
};

/**
 * Counter-based engine: the state is derived by hashing a key tuple, and the
 * output sequence is the SplitMix64 sequence from that state. Substreams for
 * (seed, level, counter, purpose) are therefore independent of the order in
 * which they are created, which is what makes sequential, lagged and resumed
 * runs reproducible.
 */
class engine {
 public:
  using result_type = std::uint64_t;

  constexpr explicit engine(std::uint64_t state = 0) : state_(state) {}

  static constexpr engine keyed(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b, stream purpose) {
    std::uint64_t h = mix(seed ^ 0x243f6a8885a308d3ULL);
    h = mix(h ^ (a + 0x13198a2e03707344ULL));
    h = mix(h ^ (b + 0xa4093822299f31d0ULL));
    h = mix(h ^ static_cast<std::uint64_t>(purpose));
    return engine(h);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound), bound > 0. Lemire's multiply-shift with
  /// rejection, so the result is exactly uniform.
  constexpr std::uint64_t below(std::uint64_t bound) {
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  constexpr std::uint64_t state() const { return state_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace simcmc
