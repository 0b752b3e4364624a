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
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "simcmc/errors.hpp"
#include "simcmc/log_domain.hpp"
#include "simcmc/models/gaussian.hpp"
#include "simcmc/rng.hpp"

namespace simcmc {

using tracking_state = Eigen::Vector4d;

/// Constant-velocity target observed by bearing from the origin.
/// State layout: (horizontal position, horizontal velocity, vertical position,
/// vertical velocity).
struct tracking_spec {
  double step = 1.0;
  double noise_scale = 5.0;
  double bearing_var = 1e-2;
  /// Observations always arrive at multiples of `grid`, elsewhere with this probability.
  double observe_probability = 0.25;
  std::size_t grid = 4;
  tracking_state initial_mean = (tracking_state() << 20.0, 1.0, 20.0, 1.0).finished();
  Eigen::Matrix4d initial_cov = Eigen::Vector4d(4.0, 1.0, 4.0, 1.0).asDiagonal();

  void validate() const {
    if (!(step > 0.0) || !(noise_scale > 0.0) || !(bearing_var > 0.0)) {
      throw error("tracking step and noise parameters must be positive");
    }
    if (observe_probability < 0.0 || observe_probability > 1.0) {
      throw error("observe_probability must lie in [0, 1]");
    }
    if (grid == 0) throw error("grid must be positive");
  }
};

inline Eigen::Matrix4d cv_transition(double dt) {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 1) = dt;
  f(2, 3) = dt;
  return f;
}

/// scale * [[dt^3/3, dt^2/2], [dt^2/2, dt]] per axis. Composing k steps of
/// length dt gives exactly the covariance for one step of length k dt.
inline Eigen::Matrix4d cv_noise(double dt, double scale) {
  Eigen::Matrix2d block;
  block << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  q.block<2, 2>(0, 0) = scale * block;
  q.block<2, 2>(2, 2) = scale * block;
  return q;
}

/// Noise-free bearing atan2(x3, x1), quadrant-resolved.
inline double bearing(const tracking_state& x) {
  if (x[0] == 0.0 && x[2] == 0.0) throw origin_bearing();
  return std::atan2(x[2], x[0]);
}

/// Maps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

inline double bearing_log_likelihood(const tracking_state& x, double y, double variance) {
  return log_normal_pdf(wrap_angle(y - bearing(x)), 0.0, variance);
}

/**
 * The tracking model sampled at an increasing list of times t_1 < t_2 < ...
 * Level n holds the state at time t_n, so the transition between levels
 * covers t_n - t_{n-1} unit steps. With times 1..P this is the plain
 * unit-step model; with the observation times only it is the model an
 * arrival-driven filter works on.
 */
class tracking {
 public:
  using state_type = tracking_state;
  using observation_type = double;

  tracking(tracking_spec spec, std::vector<std::size_t> times) : spec_(std::move(spec)), times_(std::move(times)) {
    spec_.validate();
    if (times_.empty() || times_.front() < 1) throw error("tracking times must start at 1 or later");
    for (std::size_t k = 1; k < times_.size(); ++k) {
      if (times_[k] <= times_[k - 1]) throw error("tracking times must increase");
    }
    const double lead = static_cast<double>(times_.front() - 1) * spec_.step;
    const Eigen::Matrix4d f0 = cv_transition(lead);
    initial_mean_ = f0 * spec_.initial_mean;
    const Eigen::Matrix4d p0 = f0 * spec_.initial_cov * f0.transpose() + cv_noise(lead, spec_.noise_scale);
    initial_ = gaussian<4>(p0);
    for (std::size_t k = 1; k < times_.size(); ++k) {
      const double dt = static_cast<double>(times_[k] - times_[k - 1]) * spec_.step;
      transitions_.push_back(cv_transition(dt));
      noise_.emplace_back(cv_noise(dt, spec_.noise_scale));
    }
  }

  /// Unit-step model over times 1..horizon.
  static tracking unit(tracking_spec spec, std::size_t horizon) {
    std::vector<std::size_t> t(horizon);
    for (std::size_t k = 0; k < horizon; ++k) t[k] = k + 1;
    return tracking(std::move(spec), std::move(t));
  }

  const tracking_spec& spec() const { return spec_; }
  const std::vector<std::size_t>& times() const { return times_; }
  std::size_t levels() const { return times_.size(); }

  double log_initial(const state_type& x) const { return initial_.log_pdf(x, initial_mean_); }
  state_type sample_initial(engine& rng) const { return initial_.sample(initial_mean_, rng); }
  const state_type& initial_mean() const { return initial_mean_; }

  double log_transition(std::size_t n, const state_type& prev, const state_type& x) const {
    return noise_.at(n - 2).log_pdf(x, transitions_[n - 2] * prev);
  }
  state_type sample_transition(std::size_t n, const state_type& prev, engine& rng) const {
    return noise_.at(n - 2).sample(transitions_[n - 2] * prev, rng);
  }

  double log_observation(const state_type& x, double y) const {
    return bearing_log_likelihood(x, y, spec_.bearing_var);
  }
  double sample_observation(const state_type& x, engine& rng) const {
    return bearing(x) + std::sqrt(spec_.bearing_var) * standard_normal(rng);
  }

  double observation_density_bound() const {
    return 1.0 / std::sqrt(2.0 * std::numbers::pi * spec_.bearing_var);
  }

  /// Arrival rule: certain at multiples of the grid, otherwise a Bernoulli draw.
  bool observed(std::size_t time, engine& rng) const {
    const bool on_grid = time % spec_.grid == 0;
    const bool coin = rng.uniform() < spec_.observe_probability;
    return on_grid || coin;
  }

 private:
  tracking_spec spec_;
  std::vector<std::size_t> times_;
  state_type initial_mean_;
  gaussian<4> initial_;
  std::vector<Eigen::Matrix4d> transitions_;
  std::vector<gaussian<4>> noise_;
};

}  // namespace simcmc
