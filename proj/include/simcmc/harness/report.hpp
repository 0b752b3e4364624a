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

// Run reports: a JSON document and an aligned text table. All wall-clock
// values live under the top-level "timing" key; everything else is a pure
// function of the config.

#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "simcmc/harness/config.hpp"
#include "simcmc/harness/experiment.hpp"
#include "simcmc/harness/tracking_experiment.hpp"
#include "simcmc/serialization.hpp"

#ifndef SIMCMC_VERSION
#define SIMCMC_VERSION "0.1.0"
#endif

namespace simcmc::harness {

struct check_outcome {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

inline bool all_passed(const std::vector<check_outcome>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const check_outcome& c) { return c.passed; });
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline const count_row& row_at(const arm_result& arm, bool largest) {
  const auto cmp = [](const count_row& a, const count_row& b) { return a.count < b.count; };
  return largest ? *std::max_element(arm.rows.begin(), arm.rows.end(), cmp)
                 : *std::min_element(arm.rows.begin(), arm.rows.end(), cmp);
}

inline std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace detail

/// Assertions configured under "checks", applied to every SIMCMC arm.
inline std::vector<check_outcome> evaluate_checks(const experiment_result& r) {
  const auto& c = r.config.checks;
  std::vector<check_outcome> out;
  for (const auto& arm : r.arms) {
    if (!detail::is_simcmc(arm.algorithm)) continue;
    const auto& small = detail::row_at(arm, false);
    const auto& large = detail::row_at(arm, true);
    if (c.max_rmse_at_largest) {
      out.push_back({arm.algorithm + ".max_rmse_at_largest", large.rmse <= *c.max_rmse_at_largest, false,
                     "RMSE(" + std::to_string(large.count) + ") = " + detail::fmt("%.4f", large.rmse) +
                         ", limit " + detail::fmt("%g", *c.max_rmse_at_largest)});
    }
    if (c.rmse_range_at_smallest) {
      const auto [lo, hi] = *c.rmse_range_at_smallest;
      out.push_back({arm.algorithm + ".rmse_range_at_smallest", small.rmse >= lo && small.rmse <= hi, false,
                     "RMSE(" + std::to_string(small.count) + ") = " + detail::fmt("%.4f", small.rmse) +
                         ", range [" + detail::fmt("%g", lo) + ", " + detail::fmt("%g", hi) + "]"});
    }
    if (c.rmse_decreases) {
      out.push_back({arm.algorithm + ".rmse_decreases", large.rmse < small.rmse, false,
                     "RMSE(" + std::to_string(large.count) + ") = " + detail::fmt("%.4f", large.rmse) +
                         " vs RMSE(" + std::to_string(small.count) + ") = " + detail::fmt("%.4f", small.rmse)});
    }
  }
  if (c.sign_bimodality) {
    if (!r.sign_mass) {
      out.push_back({"sign_bimodality", false, false, "no SIMCMC arm or not a Kitagawa run"});
    } else if (r.sign_mass->bimodal_levels.empty()) {
      out.push_back({"sign_bimodality", true, true, "reference shows no bimodal level"});
    } else {
      const auto& s = *r.sign_mass;
      out.push_back({"sign_bimodality", s.preserved(), false,
                     std::to_string(s.bimodal_levels.size() - s.failing_levels.size()) + " of " +
                         std::to_string(s.bimodal_levels.size()) + " bimodal levels keep at least " +
                         detail::fmt("%g", s.threshold) + " mass on each sign"});
    }
  }
  return out;
}

inline std::vector<check_outcome> evaluate_checks(const tracking_result& r) {
  std::vector<check_outcome> out;
  if (!r.config.checks.sign_test_alpha) return out;
  if (!r.sign_test) {
    out.push_back({"sign_test", false, false, "needs the simcmc and smc-n arms"});
    return out;
  }
  const auto& t = *r.sign_test;
  if (t.skipped) {
    out.push_back({"sign_test", true, true, t.reason});
  } else {
    out.push_back({"sign_test", t.passed(), false,
                   "simcmc beats smc-n in " + std::to_string(t.wins) + "/" + std::to_string(t.trials) +
                       ", p = " + detail::fmt("%.4g", t.p_value) + ", alpha " + detail::fmt("%g", t.alpha)});
  }
  return out;
}

inline json checks_to_json(const std::vector<check_outcome>& checks) {
  json a = json::array();
  for (const auto& c : checks) {
    a.push_back({{"name", c.name}, {"passed", c.passed}, {"skipped", c.skipped}, {"detail", c.detail}});
  }
  return a;
}

inline json report_header(const experiment_config& c, const std::string& kind) {
  json j;
  j["format"] = "simcmc-report";
  j["version"] = 1;
  j["kind"] = kind;
  j["code_version"] = SIMCMC_VERSION;
  j["config_hash"] = config_hash(c);
  j["config"] = c;
  return j;
}

inline json report_json(const experiment_result& r) {
  json j = report_header(r.config, "experiment");
  json res;
  res["truth_source"] = r.truth_source;
  res["truth"] = r.truth;
  if (!r.reference_runs.empty()) res["reference_runs"] = r.reference_runs;
  json timing;
  timing["total_seconds"] = r.total_seconds;
  timing["reference_seconds"] = r.reference_seconds;
  res["arms"] = json::array();
  timing["arms"] = json::array();
  for (const auto& arm : r.arms) {
    json a{{"algorithm", arm.algorithm}, {"rows", json::array()}};
    json t{{"algorithm", arm.algorithm}, {"rows", json::array()}};
    for (const auto& row : arm.rows) {
      json jr{{"count", row.count}, {"rmse", row.rmse}, {"mean", row.mean}, {"log_likelihoods", row.log_likelihoods}};
      if (!row.acceptance.empty()) jr["acceptance"] = row.acceptance;
      a["rows"].push_back(jr);
      t["rows"].push_back({{"count", row.count}, {"seconds", row.seconds}});
    }
    res["arms"].push_back(a);
    timing["arms"].push_back(t);
  }
  if (r.sign_mass) {
    const auto& s = *r.sign_mass;
    res["sign_mass"] = {{"threshold", s.threshold},
                        {"sample_count", s.sample_count},
                        {"reference_positive", s.reference_positive},
                        {"simcmc_positive", s.simcmc_positive},
                        {"bimodal_levels", s.bimodal_levels},
                        {"failing_levels", s.failing_levels}};
  }
  j["results"] = res;
  j["checks"] = checks_to_json(evaluate_checks(r));
  j["timing"] = timing;
  return j;
}

inline json report_json(const tracking_result& r) {
  json j = report_header(r.config, "tracking");
  json res;
  res["arrivals"] = r.arrivals;
  res["arms"] = json::array();
  json timing;
  timing["total_seconds"] = r.total_seconds;
  timing["reference_seconds"] = r.reference_seconds;
  timing["arms"] = json::array();
  for (const auto& a : r.arms) {
    res["arms"].push_back({{"arm", a.arm},
                           {"particles", a.particles},
                           {"mean_rmse", a.mean_rmse},
                           {"rmse", a.rmse},
                           {"mean_truth_rmse", a.mean_truth_rmse},
                           {"truth_rmse", a.truth_rmse}});
    timing["arms"].push_back({{"arm", a.arm}, {"seconds", a.seconds}});
  }
  if (r.sign_test) {
    const auto& t = *r.sign_test;
    res["sign_test"] = {{"skipped", t.skipped}, {"reason", t.reason}, {"wins", t.wins},
                        {"trials", t.trials},   {"p_value", t.p_value}, {"alpha", t.alpha}};
  }
  j["results"] = res;
  j["checks"] = checks_to_json(evaluate_checks(r));
  j["timing"] = timing;
  return j;
}

/// The report with wall-clock values removed; equal across identical runs.
inline json without_timing(json report) {
  report.erase("timing");
  return report;
}

inline std::string checks_table(const std::vector<check_outcome>& checks) {
  std::string s;
  for (const auto& c : checks) {
    s += std::string(c.skipped ? "SKIP  " : c.passed ? "PASS  " : "FAIL  ") + c.name + "  " + c.detail + "\n";
  }
  return s;
}

inline std::string report_table(const experiment_result& r) {
  std::string s = "model " + r.config.model + "  proposal " + r.config.proposal + "  replications " +
                  std::to_string(r.config.replications) + "  config " + config_hash(r.config) + "\n";
  s += "truth (" + r.truth_source + ") " + detail::fmt("%.6f", r.truth) + "\n\n";
  s += detail::pad("algorithm", 17) + detail::pad("N", 9, true) + detail::pad("RMSE", 12, true) +
       detail::pad("mean logZ", 15, true) + detail::pad("seconds", 11, true) + "\n";
  for (const auto& arm : r.arms) {
    for (const auto& row : arm.rows) {
      s += detail::pad(arm.algorithm, 17) + detail::pad(std::to_string(row.count), 9, true) +
           detail::pad(detail::fmt("%.4f", row.rmse), 12, true) +
           detail::pad(detail::fmt("%.4f", row.mean), 15, true) +
           detail::pad(detail::fmt("%.2f", row.seconds), 11, true) + "\n";
    }
  }
  if (r.sign_mass) {
    s += "\nbimodal levels (reference) " + std::to_string(r.sign_mass->bimodal_levels.size()) +
         ", failing " + std::to_string(r.sign_mass->failing_levels.size()) + "\n";
  }
  const auto checks = evaluate_checks(r);
  if (!checks.empty()) s += "\n" + checks_table(checks);
  return s;
}

inline std::string report_table(const tracking_result& r) {
  std::string s = "model tracking  budget " + std::to_string(r.config.budget) + "  lag " +
                  std::to_string(r.config.lag) + "  realizations " + std::to_string(r.config.replications) +
                  "  config " + config_hash(r.config) + "\n\n";
  s += detail::pad("arm", 14) + detail::pad("particles", 11, true) + detail::pad("RMSE(ref)", 13, true) +
       detail::pad("RMSE(truth)", 14, true) + detail::pad("seconds", 11, true) + "\n";
  for (const auto& a : r.arms) {
    s += detail::pad(a.arm, 14) + detail::pad(std::to_string(a.particles), 11, true) +
         detail::pad(detail::fmt("%.3f", a.mean_rmse), 13, true) +
         detail::pad(detail::fmt("%.3f", a.mean_truth_rmse), 14, true) +
         detail::pad(detail::fmt("%.2f", a.seconds), 11, true) + "\n";
  }
  if (r.sign_test) {
    const auto& t = *r.sign_test;
    s += t.skipped ? "\nsign test skipped: " + t.reason + "\n"
                   : "\nsign test: simcmc < smc-n in " + std::to_string(t.wins) + "/" + std::to_string(t.trials) +
                         ", p = " + detail::fmt("%.4g", t.p_value) + "\n";
  }
  const auto checks = evaluate_checks(r);
  if (!checks.empty()) s += "\n" + checks_table(checks);
  return s;
}

}  // namespace simcmc::harness
