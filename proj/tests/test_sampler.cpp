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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "simcmc/models/kitagawa.hpp"
#include "simcmc/models/linear_gaussian.hpp"
#include "simcmc/oracle/kernel.hpp"
#include "simcmc/sampler.hpp"

namespace simcmc {
namespace {

using testing::batch_means_se;
using disc_sampler = simcmc_sampler<discrete_targets, discrete_targets>;

disc_sampler two_state_sampler(const discrete_targets& t, simcmc_options o = {}) {
  return disc_sampler::nested(t, t, path<int>::from_blocks({0, 0}), o);
}

/// Indicator series of reservoir entries equal to `cell` at level n.
std::vector<double> indicator_series(const discrete_targets& t, const chain_reservoir<int>& r,
                                     std::size_t cell) {
  std::vector<double> out;
  out.reserve(r.size());
  for (std::size_t m = 0; m < r.size(); ++m) {
    out.push_back(r.visit(m, [&](const path<int>& p) { return t.index_of(p) == cell ? 1.0 : 0.0; }));
  }
  return out;
}

TEST(Init, NestedGaussianPathIsAccepted) {
  const linear_gaussian<2> model({Eigen::MatrixXd::Identity(2, 2)});
  const auto data = simulate(model, 4, 1);
  const ssm_targets<linear_gaussian<2>> t(model, data.observations);
  const prior_proposal<linear_gaussian<2>> q(model);
  auto s = simcmc_sampler<decltype(t), decltype(q)>::nested(t, q, prior_path(model, 4, 2));
  EXPECT_EQ(s.storage(), storage_mode::marginal_only);
  for (std::size_t n = 1; n <= 4; ++n) EXPECT_EQ(s.reservoir(n).size(), 1u);
}

TEST(Init, OutOfSupportReportsTheLevel) {
  const auto t = testing::two_state_p2_with_hole();
  try {
    auto s = disc_sampler::nested(t, t, path<int>::from_blocks({1, 1}));
    FAIL() << "expected init_out_of_support";
  } catch (const init_out_of_support& e) {
    EXPECT_EQ(e.level, 2u);
  }
}

TEST(Init, ConstantFunctionAveragesToTheConstant) {
  const auto t = testing::two_state_p2();
  auto s = two_state_sampler(t);
  EXPECT_DOUBLE_EQ(s.empirical_expectation(2, [](const path<int>&) { return 4.25; }), 4.25);
  s.run(10);
  EXPECT_DOUBLE_EQ(s.empirical_expectation(2, [](const path<int>&) { return 4.25; }), 4.25);
}

TEST(Init, EstimatesNeedProposals) {
  const auto t = testing::two_state_p2();
  auto s = two_state_sampler(t);
  EXPECT_THROW(s.estimates(), no_proposals_yet);
}

TEST(Sweep, ReservoirCountsGrowByOne) {
  const auto t = testing::two_state_p2();
  auto s = two_state_sampler(t);
  for (std::size_t i = 1; i <= 50; ++i) {
    s.sweep();
    EXPECT_EQ(s.iteration(), i);
    for (std::size_t n = 1; n <= 2; ++n) {
      EXPECT_EQ(s.reservoir(n).size(), i + 1);
      EXPECT_EQ(s.proposed(n), i);
      EXPECT_LE(s.accepted(n), s.proposed(n));
    }
  }
}

TEST(Sweep, MatchedProposalAcceptsEverything) {
  const auto t = testing::matched(3, 3, 2.0, 8);
  auto s = disc_sampler::nested(t, t, t.path_of(3, 0));
  s.run(1000);
  for (double a : s.acceptance_rates()) EXPECT_DOUBLE_EQ(a, 1.0);
}

TEST(Sweep, ProposalsOutsideTheSupportAreNeverAccepted) {
  const testing::unit_interval_model m{1, 50.0, 1.0};
  auto s = simcmc_sampler<testing::unit_interval_model, testing::unit_interval_model>::nested(
      m, m, path<double>::from_blocks({0.5}));
  s.run(1000);
  EXPECT_DOUBLE_EQ(s.acceptance_rates()[0], 0.0);
  for (double x : s.reservoir(1).blocks()) EXPECT_DOUBLE_EQ(x, 0.5);
}

TEST(Sweep, ReservoirStaysInsideTheSupport) {
  const auto t = testing::two_state_p2_with_hole();
  auto s = two_state_sampler(t);
  s.run(5000);
  for (const auto& p : s.reservoir(2).paths()) EXPECT_TRUE(check_support(t, 2, *p));
}

TEST(Window, StartIndex) {
  EXPECT_EQ(window_start(7, 5), 2u);
  EXPECT_EQ(window_start(12, 5), 5u);
  EXPECT_EQ(window_start(3, 5), 0u);
  EXPECT_EQ(window_start(100, 0), 0u);
}

TEST(Window, ExpectationUsesOnlyTheWindow) {
  const auto t = testing::two_state_p2();
  simcmc_options o;
  o.burn_in = 5;
  auto s = two_state_sampler(t, o);
  s.run(7);
  const auto& r = s.reservoir(1);
  double manual = 0.0;
  for (std::size_t m = 2; m <= 7; ++m) manual += r.block_at(m);
  EXPECT_DOUBLE_EQ(s.empirical_expectation(1, [](const path<int>& p) { return p.last(); }), manual / 6.0);
}

void expect_converges(interaction mode) {
  const auto t = testing::two_state_p2();
  const auto exact = oracle::enumerate_exact(t);
  simcmc_options o;
  o.seed = 3;
  o.mode = mode;
  auto s = two_state_sampler(t, o);
  s.run(200000);
  for (std::size_t cell = 0; cell < 4; ++cell) {
    const auto series = indicator_series(t, s.reservoir(2), cell);
    const double est = testing::mean_of(series);
    EXPECT_NEAR(est, exact.pi[1][cell], 3.0 * batch_means_se(series) + 1e-4) << cell;
  }
}

TEST(Convergence, SequentialReservoirMatchesEnumeration) { expect_converges(interaction::sequential); }
TEST(Convergence, LaggedReservoirMatchesEnumeration) { expect_converges(interaction::parallel_lagged); }

TEST(Convergence, RandomInstancesMatchEnumeration) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto t = discrete_targets::random(3, 3, seed, 0.1);
    const auto exact = oracle::enumerate_exact(t);
    std::size_t start = 0;
    while (t.gamma_table(3)[start] == 0.0) ++start;
    simcmc_options o;
    o.seed = seed;
    auto s = disc_sampler::nested(t, t, t.path_of(3, start), o);
    s.run(100000);
    for (std::size_t cell = 0; cell < t.cells(3); ++cell) {
      const auto series = indicator_series(t, s.reservoir(3), cell);
      EXPECT_NEAR(testing::mean_of(series), exact.pi[2][cell], 3.5 * batch_means_se(series) + 2e-3)
          << seed << " " << cell;
    }
  }
}

TEST(NormConst, ConstantWeightGivesTheExactConstant) {
  const auto t = testing::matched(2, 1, 3.0, 5);
  auto s = disc_sampler::nested(t, t, t.path_of(1, 0));
  s.run(1000);
  EXPECT_NEAR(s.estimates().log_z[0], std::log(3.0), 1e-12);
}

TEST(NormConst, ChainedEstimateMatchesEnumeration) {
  const auto t = testing::two_state_p2();
  const auto exact = oracle::enumerate_exact(t);
  std::vector<double> z2;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    simcmc_options o;
    o.seed = seed;
    auto s = two_state_sampler(t, o);
    s.run(200000);
    z2.push_back(std::exp(s.estimates().log_z[1]));
  }
  const double se_single = testing::sd_of(z2);
  EXPECT_NEAR(z2[0], exact.z[1], 3.0 * se_single);
  EXPECT_NEAR(testing::mean_of(z2), exact.z[1], 3.0 * se_single / std::sqrt(10.0));
}

// With prior proposals at n = 1 the candidates are iid, so Z_1-hat is a plain average.
TEST(NormConst, LinearGaussianSingleStepMatchesTheMarginal) {
  linear_gaussian_spec spec{Eigen::MatrixXd::Identity(1, 1)};
  const linear_gaussian<1> model(spec);
  const auto data = simulate(model, 1, 4);
  const ssm_targets<linear_gaussian<1>> t(model, data.observations);
  const prior_proposal<linear_gaussian<1>> q(model);
  auto s = simcmc_sampler<decltype(t), decltype(q)>::nested(t, q, prior_path(model, 1, 1));
  s.run(100000);
  const double y = (*data.observations[0])(0);
  const double exact = log_normal_pdf(y, 0.0, 1.0 + spec.sigma_w * spec.sigma_w);
  EXPECT_NEAR(s.estimates().log_z[0], exact, 0.015);
  EXPECT_NEAR(s.estimates().log_z[0], kalman_log_likelihood(spec, data.observations), 0.015);
}

TEST(Accrue, OnlyTouchesTheChosenLevels) {
  const auto t = testing::two_state_p3();
  auto s = disc_sampler::nested(t, t, t.path_of(3, 0));
  s.run(10);
  s.accrue(3, 3, 25);
  EXPECT_EQ(s.reservoir(1).size(), 11u);
  EXPECT_EQ(s.reservoir(2).size(), 11u);
  EXPECT_EQ(s.reservoir(3).size(), 36u);
  s.accrue(2, 3, 5);
  EXPECT_EQ(s.reservoir(2).size(), 16u);
  EXPECT_EQ(s.reservoir(3).size(), 41u);
  EXPECT_THROW(s.accrue(3, 2, 1), error);
}

TEST(Accrue, FrontierOnlyRunStillConverges) {
  const auto t = testing::two_state_p2();
  const auto exact = oracle::enumerate_exact(t);
  simcmc_options o;
  o.seed = 21;
  auto s = two_state_sampler(t, o);
  s.set_frontier(1);
  s.accrue(1, 1, 200000);
  s.set_frontier(2);
  s.accrue(2, 2, 200000);
  EXPECT_EQ(s.reservoir(2).size(), 200001u);
  for (std::size_t cell = 0; cell < 4; ++cell) {
    const auto series = indicator_series(t, s.reservoir(2), cell);
    EXPECT_NEAR(testing::mean_of(series), exact.pi[1][cell], 0.01);
  }
}

TEST(Accrue, RejectedUnderLaggedInteraction) {
  const auto t = testing::two_state_p2();
  simcmc_options o;
  o.mode = interaction::parallel_lagged;
  auto s = two_state_sampler(t, o);
  EXPECT_THROW(s.accrue(1, 2, 1), error);
}

TEST(Storage, MarginalModeRefusesPrefixAccess) {
  kitagawa model;
  const auto data = simulate(model, 3, 2);
  const ssm_targets<kitagawa> t(model, data.observations);
  const prior_proposal<kitagawa> q(model);
  auto s = simcmc_sampler<decltype(t), decltype(q)>::nested(t, q, prior_path(model, 3, 2));
  s.run(5);
  EXPECT_EQ(s.storage(), storage_mode::marginal_only);
  EXPECT_THROW(s.empirical_expectation(3, [](const path<double>& p) { return p.prefix().last(); }),
               mode_mismatch);
  EXPECT_NO_THROW(s.empirical_expectation(3, [](const path<double>& p) { return p.last(); }));
}

TEST(Storage, MarginalModeNeedsAMarkovianModel) {
  const auto t = testing::two_state_p2();
  simcmc_options o;
  o.storage = storage_mode::marginal_only;
  EXPECT_THROW(two_state_sampler(t, o), mode_mismatch);
}

TEST(Storage, FullAndMarginalRunsAgreeOnMarginals) {
  kitagawa model;
  const auto data = simulate(model, 4, 2);
  const ssm_targets<kitagawa> t(model, data.observations);
  const prior_proposal<kitagawa> q(model);
  using sampler = simcmc_sampler<decltype(t), decltype(q)>;
  simcmc_options full;
  full.storage = storage_mode::full_path;
  auto a = sampler::nested(t, q, prior_path(model, 4, 2));
  auto b = sampler::nested(t, q, prior_path(model, 4, 2), full);
  a.run(2000);
  b.run(2000);
  for (std::size_t n = 1; n <= 4; ++n) {
    EXPECT_EQ(a.reservoir(n).last_blocks(), b.reservoir(n).last_blocks());
  }
}

template <class S>
std::vector<std::vector<typename S::block_type>> all_blocks(const S& s) {
  std::vector<std::vector<typename S::block_type>> out;
  for (std::size_t n = 1; n <= s.horizon(); ++n) out.push_back(s.reservoir(n).last_blocks());
  return out;
}

TEST(Shortcut, DiscreteReservoirsAreIdentical) {
  const auto t = discrete_targets::random(3, 3, 17);
  const discrete_optimal_proposal q(t);
  using sampler = simcmc_sampler<discrete_targets, discrete_optimal_proposal>;
  simcmc_options on, off;
  on.seed = off.seed = 5;
  off.accept_before_sample = false;
  auto a = sampler::nested(t, q, t.path_of(3, 0), on);
  auto b = sampler::nested(t, q, t.path_of(3, 0), off);
  a.run(10000);
  b.run(10000);
  EXPECT_EQ(all_blocks(a), all_blocks(b));
  EXPECT_EQ(a.checkpoint().dump(), b.checkpoint().dump().replace(
                                       b.checkpoint().dump().find("\"accept_before_sample\":false"),
                                       28, "\"accept_before_sample\":true"));
}

TEST(Checkpoint, ResumeIsBitExactInFullMode) {
  const auto t = testing::two_state_p3();
  simcmc_options o;
  o.seed = 12;
  o.burn_in = 100;
  auto straight = disc_sampler::nested(t, t, t.path_of(3, 0), o);
  straight.run(1000);
  auto first = disc_sampler::nested(t, t, t.path_of(3, 0), o);
  first.run(500);
  const std::string saved = first.checkpoint().dump();
  auto resumed = disc_sampler::resume(t, t, json::parse(saved));
  resumed.run(500);
  EXPECT_EQ(resumed.checkpoint().dump(), straight.checkpoint().dump());
  EXPECT_EQ(all_blocks(resumed), all_blocks(straight));
  EXPECT_EQ(resumed.estimates().log_z, straight.estimates().log_z);
}

TEST(Checkpoint, ResumeIsBitExactInMarginalMode) {
  const linear_gaussian<2> model({doubly_stochastic(2, 1)});
  const auto data = simulate(model, 5, 3);
  const ssm_targets<linear_gaussian<2>> t(model, data.observations);
  const lg_optimal_proposal<2> q(model, data.observations);
  using sampler = simcmc_sampler<decltype(t), decltype(q)>;
  simcmc_options o;
  o.seed = 4;
  auto straight = sampler::nested(t, q, prior_path(model, 5, 1), o);
  straight.run(600);
  auto first = sampler::nested(t, q, prior_path(model, 5, 1), o);
  first.run(200);
  auto resumed = sampler::resume(t, q, json::parse(first.checkpoint().dump()));
  resumed.run(400);
  EXPECT_EQ(resumed.checkpoint().dump(), straight.checkpoint().dump());
}

TEST(Checkpoint, RejectsForeignDocuments) {
  const auto t = testing::two_state_p2();
  EXPECT_THROW(disc_sampler::resume(t, t, json{{"format", "other"}, {"version", 1}}), error);
}

TEST(Population, SeedsTheReservoirs) {
  const auto t = testing::two_state_p2();
  std::vector<std::vector<path<int>::pointer>> pop(2);
  for (int k = 0; k < 4; ++k) {
    pop[0].push_back(path<int>::from_blocks({k % 2}));
    pop[1].push_back(path<int>::from_blocks({k % 2, 1}));
  }
  auto s = disc_sampler::from_population(t, t, pop);
  EXPECT_EQ(s.reservoir(1).size(), 4u);
  EXPECT_EQ(s.reservoir(2).size(), 4u);
  s.sweep();
  EXPECT_EQ(s.reservoir(2).size(), 5u);
}

TEST(WeightBounds, SamplerTracksKitagawaBound) {
  kitagawa model;
  const auto data = simulate(model, 5, 2);
  const ssm_targets<kitagawa> t(model, data.observations);
  const prior_proposal<kitagawa> q(model);
  simcmc_options o;
  o.track_weight_bounds = true;
  auto s = simcmc_sampler<decltype(t), decltype(q)>::nested(t, q, prior_path(model, 5, 2), o);
  for (std::size_t n = 1; n <= 5; ++n) s.declare_weight_bound(n, model.observation_density_bound());
  s.run(5000);
  EXPECT_FALSE(s.weight_bounds().any_violation());
  EXPECT_GT(s.weight_bounds().running_max(5), 0.0);
}

}  // namespace
}  // namespace simcmc
