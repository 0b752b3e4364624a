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
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "simcmc/errors.hpp"
#include "simcmc/models/discrete.hpp"
#include "simcmc/rng.hpp"
#include "simcmc/target_model.hpp"

namespace simcmc::oracle {

/// Exact quantities of a tabulated sequence, all indexed row-major.
struct exact_tables {
  std::vector<std::vector<double>> pi;  ///< pi[n-1] over E^n
  std::vector<double> z;                ///< Z_n
  /// pi_ratio[n-1] over E^{n-1} (n >= 2): pi_n(x_{1:n-1}) / pi_{n-1}(x_{1:n-1}),
  /// 0 where pi_{n-1} vanishes. pi_ratio[0] is empty.
  std::vector<std::vector<double>> pi_ratio;
};

inline exact_tables enumerate_exact(const discrete_targets& t) {
  exact_tables out;
  const std::size_t k = t.alphabet();
  for (std::size_t n = 1; n <= t.horizon(); ++n) {
    const auto& g = t.gamma_table(n);
    double z = 0.0;
    for (double v : g) z += v;
    if (!(z > 0.0)) throw zero_mass(n);
    std::vector<double> pi(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) pi[x] = g[x] / z;
    std::vector<double> ratio;
    if (n >= 2) {
      const auto& prev = out.pi[n - 2];
      ratio.assign(prev.size(), 0.0);
      for (std::size_t row = 0; row < prev.size(); ++row) {
        double marginal = 0.0;
        for (std::size_t x = 0; x < k; ++x) marginal += pi[row * k + x];
        ratio[row] = prev[row] > 0.0 ? marginal / prev[row] : 0.0;
      }
    }
    out.pi.push_back(std::move(pi));
    out.z.push_back(z);
    out.pi_ratio.push_back(std::move(ratio));
  }
  return out;
}

/// w_n over E^n from the tables (0/0 taken as 0).
inline std::vector<double> weight_table(const discrete_targets& t, std::size_t n) {
  const std::size_t k = t.alphabet();
  const auto& g = t.gamma_table(n);
  const auto& q = t.proposal_table(n);
  std::vector<double> w(g.size(), 0.0);
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (g[x] == 0.0) continue;
    const double prev = n == 1 ? 1.0 : t.gamma_table(n - 1)[x / k];
    w[x] = g[x] / (prev * q[x]);
  }
  return w;
}

/// Law of a candidate at level n: (mu x q_n)(x) = mu(x_{1:n-1}) q_n(x_{1:n-1}, x_n);
/// q_1 at n = 1 (mu ignored).
inline std::vector<double> candidate_law(const discrete_targets& t, std::size_t n,
                                         const std::vector<double>& mu) {
  const std::size_t k = t.alphabet();
  const auto& q = t.proposal_table(n);
  std::vector<double> p(q.size());
  for (std::size_t x = 0; x < q.size(); ++x) p[x] = (n == 1 ? 1.0 : mu.at(x / k)) * q[x];
  return p;
}

inline void check_pmf(const std::vector<double>& mu, std::size_t size) {
  if (mu.size() != size) throw error("mu has the wrong size");
  double s = 0.0;
  for (double v : mu) {
    if (v < 0.0) throw error("mu has a negative entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw error("mu does not sum to 1");
}

/**
 * The Metropolis-Hastings kernel at level n with the empirical measure
 * replaced by mu: K(x, x') = alpha(x, x') p(x') for x' != x, and
 * K(x, x) = 1 - sum_{y != x} alpha(x, y) p(y), with p = mu x q_n and
 * alpha = 1 ^ w(x')/w(x). At n = 1 this is the independence sampler K_1.
 */
inline Eigen::MatrixXd build_kernel_matrix(const discrete_targets& t, std::size_t n,
                                           const std::vector<double>& mu) {
  check_level(n, t.horizon());
  if (n > 1) check_pmf(mu, t.cells(n - 1));
  const auto w = weight_table(t, n);
  const auto p = candidate_law(t, n, mu);
  const auto size = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index x = 0; x < size; ++x) {
    double moved = 0.0;
    const double lw = std::log(w[static_cast<std::size_t>(x)]);
    for (Eigen::Index y = 0; y < size; ++y) {
      if (y == x) continue;
      const double a = acceptance_ratio(std::log(w[static_cast<std::size_t>(y)]), lw);
      m(x, y) = a * p[static_cast<std::size_t>(y)];
      moved += m(x, y);
    }
    m(x, x) = 1.0 - moved;
  }
  return m;
}

/// omega_n(mu)(x) = pi_{n/n-1}(x_{1:n-1}) mu(x_{1:n-1}) pibar_n(x_{1:n-1}, x_n) / mu(pi_{n/n-1}),
/// the invariant law of build_kernel_matrix(t, n, mu). pi_1 at n = 1.
inline std::vector<double> omega(const discrete_targets& t, const exact_tables& exact,
                                 std::size_t n, const std::vector<double>& mu) {
  check_level(n, t.horizon());
  if (n == 1) return exact.pi[0];
  check_pmf(mu, t.cells(n - 1));
  const std::size_t k = t.alphabet();
  const auto& pi = exact.pi[n - 1];
  const auto& ratio = exact.pi_ratio[n - 1];
  double norm = 0.0;
  for (std::size_t row = 0; row < mu.size(); ++row) norm += mu[row] * ratio[row];
  if (!(norm > 0.0)) throw zero_mass(n);
  std::vector<double> out(pi.size(), 0.0);
  for (std::size_t row = 0; row < mu.size(); ++row) {
    double marginal = 0.0;
    for (std::size_t x = 0; x < k; ++x) marginal += pi[row * k + x];
    if (marginal == 0.0) continue;
    for (std::size_t x = 0; x < k; ++x) {
      const double conditional = pi[row * k + x] / marginal;
      out[row * k + x] = ratio[row] * mu[row] * conditional / norm;
    }
  }
  return out;
}

/// max_x |(omega K)(x) - omega(x)|.
inline double stationarity_residual(const Eigen::MatrixXd& kernel, const std::vector<double>& w) {
  const Eigen::Map<const Eigen::RowVectorXd> row(w.data(), static_cast<Eigen::Index>(w.size()));
  return (row * kernel - row).cwiseAbs().maxCoeff();
}

inline double max_row_sum_error(const Eigen::MatrixXd& kernel) {
  return (kernel.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

struct contraction_report {
  std::vector<double> tv;  ///< tv[m-1] = max_x ||K^m(x, .) - omega||_tv
  double rho_fit = 0.0;    ///< least-squares rate on log tv
  double rho_envelope = 0.0;  ///< smallest rho with tv(m) <= tv(1) rho^(m-1) for all m
  bool monotone = true;
  bool geometric() const { return monotone && rho_envelope < 1.0 && rho_fit < 1.0; }
};

/// Total variation is half the L1 distance over the finite space.
inline contraction_report contraction_check(const Eigen::MatrixXd& kernel,
                                            const std::vector<double>& w, int max_power = 20) {
  const Eigen::Map<const Eigen::RowVectorXd> target(w.data(), static_cast<Eigen::Index>(w.size()));
  contraction_report r;
  Eigen::MatrixXd power = kernel;
  for (int m = 1; m <= max_power; ++m) {
    if (m > 1) power = (power * kernel).eval();
    double worst = 0.0;
    for (Eigen::Index x = 0; x < power.rows(); ++x) {
      worst = std::max(worst, 0.5 * (power.row(x) - target).cwiseAbs().sum());
    }
    r.tv.push_back(worst);
  }
  constexpr double floor = 1e-13;
  for (std::size_t m = 1; m < r.tv.size(); ++m) {
    if (r.tv[m] > r.tv[m - 1] + floor) r.monotone = false;
  }
  const double first = r.tv.front();
  if (first <= floor) return r;  // coupled after one step

  double envelope = 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t m = 0; m < r.tv.size(); ++m) {
    if (r.tv[m] <= floor) break;
    if (m > 0) envelope = std::max(envelope, std::pow(r.tv[m] / first, 1.0 / static_cast<double>(m)));
    const double xm = static_cast<double>(m + 1);
    const double ym = std::log(r.tv[m]);
    sx += xm;
    sy += ym;
    sxx += xm * xm;
    sxy += xm * ym;
    ++used;
  }
  r.rho_envelope = envelope;
  if (used >= 2) {
    const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    r.rho_fit = std::exp(slope);
  }
  return r;
}

/// max_n |Z_n/Z_{n-1} - sum_x w_n(x) (pi_{n-1} x q_n)(x)|, with Z_0 = 1.
inline double identity_check(const discrete_targets& t) {
  const auto exact = enumerate_exact(t);
  double worst = 0.0;
  for (std::size_t n = 1; n <= t.horizon(); ++n) {
    const auto w = weight_table(t, n);
    const auto p = candidate_law(t, n, n > 1 ? exact.pi[n - 2] : std::vector<double>{});
    double integral = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) integral += w[x] * p[x];
    const double ratio = exact.z[n - 1] / (n > 1 ? exact.z[n - 2] : 1.0);
    worst = std::max(worst, std::abs(ratio - integral));
  }
  return worst;
}

/// Random pmf over `size` cells; roughly zero_fraction of them set to 0.
inline std::vector<double> random_pmf(std::size_t size, engine& rng, double zero_fraction = 0.0) {
  std::vector<double> p(size);
  double s = 0.0;
  for (auto& v : p) {
    v = rng.uniform() < zero_fraction ? 0.0 : 0.05 + rng.uniform();
    s += v;
  }
  if (s == 0.0) {
    p[0] = 1.0;
    s = 1.0;
  }
  for (auto& v : p) v /= s;
  return p;
}

struct instance_result {
  std::size_t alphabet = 0;
  std::size_t horizon = 0;
  double row_sum_error = 0.0;
  double stationarity = 0.0;   ///< max over levels of |omega K - omega|
  double fixed_point = 0.0;    ///< max over levels of |omega_n(pi_{n-1}) - pi_n|
  double identity = 0.0;
  double rho_envelope = 0.0;
  double rho_fit = 0.0;
  bool geometric = true;
};

/// All kernel checks on one random instance: for every level, a random mu
/// and the exact pi_{n-1}.
inline instance_result verify_instance(std::size_t alphabet, std::size_t horizon, std::uint64_t seed,
                                       double zero_fraction = 0.0) {
  const auto t = discrete_targets::random(alphabet, horizon, seed, zero_fraction);
  const auto exact = enumerate_exact(t);
  engine rng = engine::keyed(seed, alphabet, horizon + 100, stream::instance);
  instance_result r;
  r.alphabet = alphabet;
  r.horizon = horizon;
  for (std::size_t n = 1; n <= horizon; ++n) {
    std::vector<std::vector<double>> mus;
    if (n == 1) {
      mus.emplace_back();
    } else {
      mus.push_back(random_pmf(t.cells(n - 1), rng));
      mus.push_back(exact.pi[n - 2]);
    }
    for (const auto& mu : mus) {
      const auto kernel = build_kernel_matrix(t, n, mu);
      const auto w = omega(t, exact, n, mu);
      r.row_sum_error = std::max(r.row_sum_error, max_row_sum_error(kernel));
      r.stationarity = std::max(r.stationarity, stationarity_residual(kernel, w));
      const auto c = contraction_check(kernel, w);
      r.rho_envelope = std::max(r.rho_envelope, c.rho_envelope);
      r.rho_fit = std::max(r.rho_fit, c.rho_fit);
      r.geometric = r.geometric && c.geometric();
    }
    if (n > 1) {
      const auto fixed = omega(t, exact, n, exact.pi[n - 2]);
      for (std::size_t x = 0; x < fixed.size(); ++x) {
        r.fixed_point = std::max(r.fixed_point, std::abs(fixed[x] - exact.pi[n - 1][x]));
      }
    }
  }
  r.identity = identity_check(t);
  return r;
}

}  // namespace simcmc::oracle
