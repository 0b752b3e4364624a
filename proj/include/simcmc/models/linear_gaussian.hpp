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
#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "simcmc/errors.hpp"
#include "simcmc/models/gaussian.hpp"
#include "simcmc/models/state_space.hpp"
#include "simcmc/path.hpp"
#include "simcmc/rng.hpp"

namespace simcmc {

/// X_1 ~ N(0, I), X_n = A X_{n-1} + sigma_v V_n, Y_n = X_n + sigma_w W_n.
struct linear_gaussian_spec {
  Eigen::MatrixXd transition;
  double sigma_v = 2.0;
  double sigma_w = 0.5;

  Eigen::Index dim() const { return transition.rows(); }

  void validate() const {
    if (transition.rows() == 0 || transition.rows() != transition.cols()) {
      throw error("transition matrix must be square and non-empty");
    }
    if (!(sigma_v > 0.0) || !(sigma_w > 0.0)) throw error("noise scales must be positive");
  }
};

/// Sinkhorn normalization of a seeded matrix with entries in [0.1, 1.1):
/// alternate row and column scaling until both sums are within 1e-12 of 1,
/// giving up after max_iterations.
inline Eigen::MatrixXd doubly_stochastic(Eigen::Index d, std::uint64_t seed,
                                         int max_iterations = 100) {
  engine rng = engine::keyed(seed, static_cast<std::uint64_t>(d), 0, stream::instance);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) a(r, c) = 0.1 + rng.uniform();
  for (int it = 0; it < max_iterations; ++it) {
    a.array().colwise() /= a.rowwise().sum().array();
    a.array().rowwise() /= a.colwise().sum().array();
    const double row_err = (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
    if (row_err < 1e-12) break;
  }
  return a;
}

template <int D = Eigen::Dynamic>
class linear_gaussian {
 public:
  using state_type = Eigen::Matrix<double, D, 1>;
  using observation_type = state_type;
  using matrix_type = Eigen::Matrix<double, D, D>;

  explicit linear_gaussian(linear_gaussian_spec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (D != Eigen::Dynamic && spec_.dim() != D) throw error("dimension mismatch");
    a_ = spec_.transition;
    var_v_ = spec_.sigma_v * spec_.sigma_v;
    var_w_ = spec_.sigma_w * spec_.sigma_w;
  }

  const linear_gaussian_spec& spec() const { return spec_; }
  Eigen::Index dim() const { return spec_.dim(); }
  const matrix_type& transition() const { return a_; }
  double var_v() const { return var_v_; }
  double var_w() const { return var_w_; }

  double log_initial(const state_type& x) const {
    return log_isotropic_normal(x, state_type(state_type::Zero(dim())), 1.0);
  }
  state_type sample_initial(engine& rng) const { return standard_normal_vector<D>(rng, dim()); }

  double log_transition(std::size_t, const state_type& prev, const state_type& x) const {
    return log_isotropic_normal(x, state_type(a_ * prev), var_v_);
  }
  state_type sample_transition(std::size_t, const state_type& prev, engine& rng) const {
    return a_ * prev + spec_.sigma_v * standard_normal_vector<D>(rng, dim());
  }

  double log_observation(const state_type& x, const observation_type& y) const {
    return log_isotropic_normal(y, x, var_w_);
  }
  observation_type sample_observation(const state_type& x, engine& rng) const {
    return x + spec_.sigma_w * standard_normal_vector<D>(rng, dim());
  }

 private:
  linear_gaussian_spec spec_;
  matrix_type a_;
  double var_v_ = 0.0;
  double var_w_ = 0.0;
};

/// Exact log p(y_{1:n}) by the covariance-form Kalman filter.
template <class V>
double kalman_log_likelihood(const linear_gaussian_spec& spec, const std::vector<V>& y) {
  spec.validate();
  const Eigen::Index d = spec.dim();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov = eye;
  double ll = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    if (n > 0) {
      mean = spec.transition * mean;
      cov = spec.transition * cov * spec.transition.transpose() + spec.sigma_v * spec.sigma_v * eye;
    }
    const Eigen::MatrixXd innovation_cov = cov + spec.sigma_w * spec.sigma_w * eye;
    Eigen::LLT<Eigen::MatrixXd> llt(innovation_cov);
    if (llt.info() != Eigen::Success) {
      throw numerical_failure("innovation covariance not positive definite at step " +
                              std::to_string(n + 1));
    }
    const Eigen::VectorXd innovation = Eigen::VectorXd(y[n]) - mean;
    const Eigen::MatrixXd l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    ll += -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det +
                  innovation.dot(llt.solve(innovation)));
    const Eigen::MatrixXd gain = llt.solve(cov).transpose();
    mean += gain * innovation;
    cov = (eye - gain) * cov;
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
  return ll;
}

template <class V>
double kalman_log_likelihood(const linear_gaussian_spec& spec,
                             const observation_sequence<V>& y) {
  std::vector<V> full;
  for (const auto& o : y) {
    if (!o) throw error("the Kalman oracle needs every observation");
    full.push_back(*o);
  }
  return kalman_log_likelihood(spec, full);
}

template <int D>
struct optimal_draw {
  Eigen::Matrix<double, D, 1> sample;
  double log_density;
  /// log of int f(x_{n-1}, x) g(x, y_n) dx; independent of the sample.
  double log_weight;
};

/**
 * The conditional p(x_n | x_{n-1}, y_n) proportional to f(x_{n-1}, x_n) g(x_n, y_n).
 * With isotropic noise it is N(s (A x_{n-1}/sv^2 + y/sw^2), s I), s = 1/(1/sv^2 + 1/sw^2).
 * At n = 1 the prior N(0, I) plays the role of f. previous == nullptr means n = 1.
 */
template <int D>
class lg_conditional {
 public:
  using vector_type = Eigen::Matrix<double, D, 1>;

  lg_conditional(const linear_gaussian<D>& model, const vector_type* previous, const vector_type& y) {
    const double prior_var = previous ? model.var_v() : 1.0;
    const vector_type prior_mean =
        previous ? vector_type(model.transition() * *previous) : vector_type(vector_type::Zero(y.size()));
    variance_ = 1.0 / (1.0 / prior_var + 1.0 / model.var_w());
    mean_ = variance_ * (prior_mean / prior_var + y / model.var_w());
    log_weight_ = log_isotropic_normal(y, prior_mean, prior_var + model.var_w());
  }

  const vector_type& mean() const { return mean_; }
  double variance() const { return variance_; }
  double log_weight() const { return log_weight_; }

  vector_type sample(engine& rng) const {
    return mean_ + std::sqrt(variance_) * standard_normal_vector<D>(rng, mean_.size());
  }
  double log_density(const vector_type& x) const { return log_isotropic_normal(x, mean_, variance_); }

 private:
  vector_type mean_;
  double variance_ = 0.0;
  double log_weight_ = 0.0;
};

template <int D>
optimal_draw<D> optimal_proposal_lg(const linear_gaussian<D>& model,
                                    const Eigen::Matrix<double, D, 1>* previous,
                                    const Eigen::Matrix<double, D, 1>& y, engine& rng) {
  const lg_conditional<D> c(model, previous, y);
  auto x = c.sample(rng);
  const double ld = c.log_density(x);
  return {std::move(x), ld, c.log_weight()};
}

/// The locally optimal proposal for the linear Gaussian model. Its weight
/// depends on x_{n-1} only, so acceptance can be decided before sampling.
template <int D>
class lg_optimal_proposal {
 public:
  using block_type = Eigen::Matrix<double, D, 1>;
  static constexpr bool markovian = true;

  lg_optimal_proposal(const linear_gaussian<D>& model, const observation_sequence<block_type>& y)
      : model_(&model), y_(&y) {}

  bool weight_independent_of_last(std::size_t) const { return true; }

  double log_prefix_weight(std::size_t n, const path<block_type>& prefix) const {
    const auto& y = y_->at(n - 1);
    if (!y) return 0.0;
    return conditional(n, prefix, *y).log_weight();
  }

  block_type sample(std::size_t n, const path<block_type>& prefix, engine& rng) const {
    const auto& y = y_->at(n - 1);
    if (!y) return n == 1 ? model_->sample_initial(rng) : model_->sample_transition(n, prefix.last(), rng);
    return conditional(n, prefix, *y).sample(rng);
  }

  double log_density(std::size_t n, const path<block_type>& prefix, const block_type& x) const {
    const auto& y = y_->at(n - 1);
    if (!y) return n == 1 ? model_->log_initial(x) : model_->log_transition(n, prefix.last(), x);
    return conditional(n, prefix, *y).log_density(x);
  }

 private:
  lg_conditional<D> conditional(std::size_t n, const path<block_type>& prefix,
                                const block_type& y) const {
    return lg_conditional<D>(*model_, n == 1 ? nullptr : &prefix.last(), y);
  }

  const linear_gaussian<D>* model_;
  const observation_sequence<block_type>* y_;
};

}  // namespace simcmc
