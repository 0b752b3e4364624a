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
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "simcmc/errors.hpp"
#include "simcmc/rng.hpp"

namespace simcmc {

inline double standard_normal(engine& rng) {
  std::normal_distribution<double> z;
  return z(rng);
}

template <int D>
Eigen::Matrix<double, D, 1> standard_normal_vector(engine& rng, Eigen::Index size) {
  Eigen::Matrix<double, D, 1> v(size);
  for (Eigen::Index k = 0; k < size; ++k) v[k] = standard_normal(rng);
  return v;
}

/// log N(x; mean, variance * I).
template <class V>
double log_isotropic_normal(const V& x, const V& mean, double variance) {
  const auto d = static_cast<double>(x.size());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi * variance) +
                 (x - mean).squaredNorm() / variance);
}

/// A Gaussian with a fixed covariance, factored once.
template <int D>
class gaussian {
 public:
  using vector_type = Eigen::Matrix<double, D, 1>;
  using matrix_type = Eigen::Matrix<double, D, D>;

  gaussian() = default;

  explicit gaussian(const matrix_type& covariance) : llt_(covariance) {
    if (llt_.info() != Eigen::Success) throw numerical_failure("covariance is not positive definite");
    const matrix_type l = llt_.matrixL();
    log_det_ = 2.0 * l.diagonal().array().log().sum();
    chol_ = l;
  }

  double log_pdf(const vector_type& x, const vector_type& mean) const {
    const vector_type r = llt_.matrixL().solve(x - mean);
    const auto d = static_cast<double>(x.size());
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det_ + r.squaredNorm());
  }

  vector_type sample(const vector_type& mean, engine& rng) const {
    return mean + chol_ * standard_normal_vector<D>(rng, mean.size());
  }

  const matrix_type& cholesky() const { return chol_; }
  double log_det() const { return log_det_; }

 private:
  Eigen::LLT<matrix_type> llt_;
  matrix_type chol_;
  double log_det_ = 0.0;
};

}  // namespace simcmc
