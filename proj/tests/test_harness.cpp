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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "simcmc/harness/config.hpp"
#include "simcmc/harness/dataset.hpp"
#include "simcmc/harness/experiment.hpp"
#include "simcmc/harness/report.hpp"
#include "simcmc/harness/stats.hpp"
#include "simcmc/harness/tracking_experiment.hpp"
#include "simcmc/harness/verify.hpp"

namespace simcmc::harness {
namespace {

// Spreadsheet-style: first pass squares each residual into a column, second
// pass averages the column.
double two_pass_rmse(const std::vector<double>& est, double truth) {
  std::vector<double> column;
  for (double e : est) column.push_back((e - truth) * (e - truth));
  long double total = 0;
  for (double v : column) total += v;
  return std::sqrt(static_cast<double>(total / column.size()));
}

TEST(Rmse, EqualInputsGiveZero) {
  const std::vector<double> a{1.5, -2.0, 3.25};
  EXPECT_EQ(rmse(a, a), 0.0);
}

TEST(Rmse, SinglePair) {
  const std::vector<double> e{3.0}, t{1.0};
  EXPECT_DOUBLE_EQ(rmse(e, t), 2.0);
}

TEST(Rmse, MatchesTwoPassAgainstConstantTruth) {
  std::vector<double> est;
  engine rng = engine::keyed(5, 0, 0, stream::simulate);
  for (int k = 0; k < 37; ++k) est.push_back(-100.0 + 3.0 * standard_normal(rng));
  EXPECT_NEAR(rmse(est, -100.5), two_pass_rmse(est, -100.5), 1e-12);
}

TEST(Rmse, LengthMismatchAndEmpty) {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  EXPECT_THROW(rmse(a, b), length_mismatch);
  const std::vector<double> none;
  EXPECT_THROW(rmse(none, none), error);
}

TEST(Stats, LogMeanExpMatchesDirect) {
  const std::vector<double> v{-1.0, 0.5, 2.0};
  const double direct = std::log((std::exp(-1.0) + std::exp(0.5) + std::exp(2.0)) / 3.0);
  EXPECT_NEAR(log_mean_exp(v), direct, 1e-14);
  const std::vector<double> far{-1000.0, -1000.0};
  EXPECT_NEAR(log_mean_exp(far), -1000.0, 1e-12);
}

TEST(Stats, SignTestMatchesSubsetCount) {
  const unsigned trials = 20;
  for (unsigned wins : {0u, 10u, 14u, 15u, 20u}) {
    std::uint64_t count = 0;
    for (std::uint32_t mask = 0; mask < (1u << trials); ++mask) count += std::popcount(mask) >= static_cast<int>(wins);
    const double expected = static_cast<double>(count) / static_cast<double>(1u << trials);
    EXPECT_NEAR(sign_test_p_value(wins, trials), expected, 1e-12) << wins;
  }
  EXPECT_LT(sign_test_p_value(15, 20), 0.05);
  EXPECT_GT(sign_test_p_value(14, 20), 0.05);
  EXPECT_THROW(sign_test_p_value(3, 2), error);
}

TEST(Stats, DerivedSeedsDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (const char* label : {"simcmc", "smc", "reference"}) {
    for (std::uint64_t a = 0; a < 10; ++a) {
      for (std::uint64_t b = 0; b < 10; ++b) seen.insert(derive_seed(1, label, a, b));
    }
  }
  EXPECT_EQ(seen.size(), 300u);
  EXPECT_EQ(derive_seed(7, "x", 1, 2), derive_seed(7, "x", 1, 2));
  EXPECT_NE(derive_seed(7, "x", 1, 2), derive_seed(8, "x", 1, 2));
}

TEST(Config, RoundTripIsBitExact) {
  experiment_config c;
  c.sigma_v = 0.1 + 0.2;
  c.sigma_w = 1.0 / 3.0;
  c.sample_counts = {10, 20, 30};
  c.seed = 18446744073709551615ULL;
  c.checks.max_rmse_at_largest = 0.15;
  c.checks.rmse_decreases = true;
  json j = c;
  const auto back = parse_config(json::parse(j.dump()));
  EXPECT_EQ(canonical(back), canonical(c));
  EXPECT_EQ(back.sigma_v, c.sigma_v);
  EXPECT_EQ(back.sigma_w, c.sigma_w);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, TrackingRoundTrip) {
  experiment_config c;
  c.model = "tracking";
  c.budget = 100;
  c.lag = 3;
  c.arms = {"smc-n", "simcmc"};
  c.checks.sign_test_alpha = 0.05;
  json j = c;
  EXPECT_FALSE(j.contains("sample_counts"));
  const auto back = parse_config(json::parse(j.dump()));
  EXPECT_EQ(canonical(back), canonical(c));
  EXPECT_EQ(back.lag, 3u);
}

template <class F>
std::string failing_field(F&& f) {
  try {
    f();
  } catch (const config_error& e) {
    return e.field;
  }
  return "<none>";
}

TEST(Config, ValidationNamesTheField) {
  EXPECT_EQ(failing_field([] { parse_config(json{{"horizon", 0}}); }), "horizon");
  EXPECT_EQ(failing_field([] { parse_config(json{{"replications", 0}}); }), "replications");
  EXPECT_EQ(failing_field([] { parse_config(json{{"sample_counts", {100, 0}}}); }), "sample_counts");
  EXPECT_EQ(failing_field([] { parse_config(json{{"model", "nope"}}); }), "model");
  EXPECT_EQ(failing_field([] { parse_config(json{{"sigma_w", -1.0}}); }), "sigma_w");
  EXPECT_EQ(failing_field([] { parse_config(json{{"seed", -3}}); }), "seed");
  EXPECT_EQ(failing_field([] { parse_config(json{{"horizon", "ten"}}); }), "horizon");
  EXPECT_EQ(failing_field([] { parse_config(json{{"horizn", 10}}); }), "horizn");
  EXPECT_EQ(failing_field([] { parse_config(json{{"algorithms", {"mcmc"}}}); }), "algorithms");
  EXPECT_EQ(failing_field([] { parse_config(json{{"model", "kitagawa"}, {"proposal", "optimal"}}); }),
            "proposal");
  EXPECT_EQ(failing_field([] { parse_config(json{{"model", "tracking"}, {"budget", 0}}); }), "budget");
  EXPECT_EQ(failing_field([] { parse_config(json{{"model", "tracking"}, {"arms", {"pf"}}}); }), "arms");
  EXPECT_EQ(failing_field([] { parse_config(json{{"checks", {{"bogus", 1}}}}); }), "checks.bogus");
  EXPECT_EQ(failing_field([] { parse_config(json::array()); }), "<root>");
}

TEST(Dataset, TrackingRoundTripKeepsMissingObservations) {
  const tracking_spec spec;
  const auto data = simulate_tracking(spec, 30, 11);
  const auto j = dataset_to_json("tracking", json{{"grid", spec.grid}}, data);
  const auto back = dataset_from_json<tracking_state, double>(json::parse(j.dump()), "tracking");
  ASSERT_EQ(back.states.size(), data.states.size());
  EXPECT_EQ(back.seed, data.seed);
  EXPECT_EQ(back.presence(), data.presence());
  for (std::size_t n = 0; n < data.states.size(); ++n) {
    EXPECT_EQ(back.states[n], data.states[n]);
    EXPECT_EQ(back.observations[n], data.observations[n]);
  }
  EXPECT_THROW((dataset_from_json<tracking_state, double>(j, "kitagawa")), error);
}

experiment_config small_lg() {
  experiment_config c;
  c.horizon = 6;
  c.sample_counts = {50, 200};
  c.replications = 3;
  c.algorithms = {"simcmc", "simcmc-parallel", "smc"};
  c.checks.rmse_decreases = true;
  return c;
}

TEST(RunExperiment, LinearGaussianReportIsDeterministic) {
  const auto c = small_lg();
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  EXPECT_EQ(without_timing(report_json(a)).dump(), without_timing(report_json(b)).dump());
}

TEST(RunExperiment, LinearGaussianReportSchema) {
  const auto c = small_lg();
  const auto r = run_experiment(c);
  const linear_gaussian_spec spec{doubly_stochastic(2, c.matrix_seed), c.sigma_v, c.sigma_w};
  const auto data = simulate(linear_gaussian<2>(spec), c.horizon, c.data_seed);
  EXPECT_NEAR(r.truth, kalman_log_likelihood(spec, data.observations), 1e-12);
  ASSERT_EQ(r.arms.size(), 3u);
  for (const auto& arm : r.arms) {
    ASSERT_EQ(arm.rows.size(), 2u);
    for (const auto& row : arm.rows) {
      EXPECT_EQ(row.log_likelihoods.size(), 3u);
      EXPECT_GE(row.rmse, 0.0);
      EXPECT_NEAR(row.rmse, two_pass_rmse(row.log_likelihoods, r.truth), 1e-12);
      for (double a : row.acceptance) {
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
      }
      EXPECT_EQ(row.acceptance.size(), arm.algorithm == "smc" ? 0u : c.horizon);
    }
  }
  const auto j = report_json(r);
  EXPECT_EQ(j.at("format"), "simcmc-report");
  EXPECT_EQ(j.at("config_hash"), config_hash(c));
  EXPECT_EQ(j.at("code_version"), SIMCMC_VERSION);
  EXPECT_EQ(j.at("results").at("arms").size(), 3u);
  EXPECT_TRUE(j.contains("timing"));
  EXPECT_FALSE(without_timing(j).contains("timing"));
  EXPECT_EQ(j.at("checks").size(), 2u);  // rmse_decreases for both SIMCMC arms
  const auto table = report_table(r);
  EXPECT_NE(table.find("simcmc-parallel"), std::string::npos);
  EXPECT_NE(table.find("kalman"), std::string::npos);
}

TEST(RunExperiment, SeedChangesResults) {
  auto c = small_lg();
  const auto a = run_experiment(c);
  c.seed = 99;
  const auto b = run_experiment(c);
  EXPECT_NE(a.arms[0].rows[0].log_likelihoods, b.arms[0].rows[0].log_likelihoods);
  EXPECT_EQ(a.truth, b.truth);
}

TEST(RunExperiment, OptimalProposalAndDynamicDimension) {
  auto c = small_lg();
  c.proposal = "optimal";
  c.dimension = 3;
  c.algorithms = {"smc"};
  const auto r = run_experiment(c);
  EXPECT_EQ(r.arms.size(), 1u);
  EXPECT_LT(r.arms[0].rows[1].rmse, 1.0);
}

TEST(RunExperiment, KitagawaSignMassAndChecks) {
  experiment_config c;
  c.model = "kitagawa";
  c.horizon = 8;
  c.reference_particles = 5000;
  c.sample_counts = {100, 400};
  c.replications = 2;
  c.checks.sign_bimodality = true;
  c.checks.max_rmse_at_largest = 1e9;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.truth_source, "smc-reference");
  ASSERT_TRUE(r.sign_mass.has_value());
  EXPECT_EQ(r.sign_mass->reference_positive.size(), c.horizon);
  for (double p : r.sign_mass->simcmc_positive) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  const auto checks = evaluate_checks(r);
  ASSERT_EQ(checks.size(), 2u);
  EXPECT_TRUE(checks[0].passed);
  EXPECT_EQ(checks[1].name, "sign_bimodality");
}

TEST(RunExperiment, TrackingModelRejected) {
  experiment_config c;
  c.model = "tracking";
  EXPECT_THROW(run_experiment(c), config_error);
}

TEST(Checks, ThresholdLogic) {
  experiment_result r;
  r.config.checks.max_rmse_at_largest = 0.15;
  r.config.checks.rmse_range_at_smallest = std::make_pair(0.8, 3.2);
  r.config.checks.rmse_decreases = true;
  count_row small{1000, {}, 1.0, 0.0, {}, 0.0};
  count_row large{25000, {}, 0.2, 0.0, {}, 0.0};
  r.arms.push_back({"simcmc", {large, small}});
  r.arms.push_back({"smc", {small, large}});  // not checked
  const auto checks = evaluate_checks(r);
  ASSERT_EQ(checks.size(), 3u);
  EXPECT_FALSE(checks[0].passed);  // 0.2 > 0.15
  EXPECT_TRUE(checks[1].passed);
  EXPECT_TRUE(checks[2].passed);
  EXPECT_FALSE(all_passed(checks));
}

TEST(Tracking, PredictionFill) {
  const tracking_spec spec;
  const tracking_state m(1.0, 2.0, 3.0, -1.0);
  const auto out = detail::fill_by_prediction(spec, 5, {3}, {m});
  EXPECT_EQ(out[0], spec.initial_mean);
  EXPECT_EQ(out[1], cv_transition(1.0) * spec.initial_mean);
  EXPECT_EQ(out[2], m);
  EXPECT_EQ(out[4], tracking_state(1.0 + 4.0, 2.0, 3.0 - 2.0, -1.0));
}

experiment_config small_tracking() {
  experiment_config c;
  c.model = "tracking";
  c.horizon = 16;
  c.replications = 3;
  c.budget = 30;
  c.reference_particles = 2000;
  c.checks.sign_test_alpha = 0.05;
  return c;
}

TEST(Tracking, SmallComparisonDeterministic) {
  const auto c = small_tracking();
  const auto a = tracking_comparison(c);
  const auto b = tracking_comparison(c);
  EXPECT_EQ(without_timing(report_json(a)).dump(), without_timing(report_json(b)).dump());
  ASSERT_EQ(a.arms.size(), 3u);
  EXPECT_EQ(a.arms[1].particles, 4 * c.budget);
  for (const auto& arm : a.arms) {
    ASSERT_EQ(arm.rmse.size(), c.replications);
    for (double v : arm.rmse) EXPECT_GE(v, 0.0);
  }
  for (std::size_t n : a.arrivals) EXPECT_GE(n, c.horizon / c.grid);
  ASSERT_TRUE(a.sign_test.has_value());
  EXPECT_FALSE(a.sign_test->skipped);
  EXPECT_EQ(evaluate_checks(a).size(), 1u);
}

TEST(Tracking, DegenerateNoiseSkipsOrdering) {
  auto c = small_tracking();
  c.noise_scale = 1e-10;
  c.initial_cov_scale = 1e-10;
  const auto r = tracking_comparison(c);
  for (const auto& arm : r.arms) {
    EXPECT_LT(arm.mean_rmse, 1e-3) << arm.arm;
    EXPECT_LT(arm.mean_truth_rmse, 1e-3) << arm.arm;
  }
  ASSERT_TRUE(r.sign_test.has_value());
  EXPECT_TRUE(r.sign_test->skipped);
  const auto checks = evaluate_checks(r);
  ASSERT_EQ(checks.size(), 1u);
  EXPECT_TRUE(checks[0].skipped);
  EXPECT_TRUE(checks[0].passed);
}

TEST(Tracking, WrongModelRejected) {
  experiment_config c;
  EXPECT_THROW(tracking_comparison(c), config_error);
}

TEST(KernelSuite, SmallBatchPasses) {
  const auto r = kernel_suite(9, 3);
  EXPECT_EQ(r.instances.size(), 9u);
  EXPECT_TRUE(r.passed());
  std::set<std::pair<std::size_t, std::size_t>> shapes;
  for (const auto& i : r.instances) shapes.insert({i.alphabet, i.horizon});
  EXPECT_EQ(shapes.size(), 9u);
}

}  // namespace
}  // namespace simcmc::harness
