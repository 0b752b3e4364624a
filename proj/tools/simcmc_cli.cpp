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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "simcmc/harness/config.hpp"
#include "simcmc/harness/dataset.hpp"
#include "simcmc/harness/experiment.hpp"
#include "simcmc/harness/report.hpp"
#include "simcmc/harness/tracking_experiment.hpp"
#include "simcmc/harness/verify.hpp"

namespace fs = std::filesystem;
using namespace simcmc;
using namespace simcmc::harness;

namespace {

constexpr const char* output_env = "SIMCMC_OUTPUT_DIR";

/// Report location without extension: --out, then the config's "output",
/// then $SIMCMC_OUTPUT_DIR/<config stem>, then ./<config stem>.
fs::path output_base(const std::string& config_file, const std::optional<std::string>& configured,
                     const std::string& cli_out) {
  fs::path base;
  if (!cli_out.empty()) {
    base = cli_out;
  } else if (configured) {
    base = *configured;
  } else {
    const char* dir = std::getenv(output_env);
    base = fs::path(dir && *dir ? dir : ".") / fs::path(config_file).stem();
  }
  if (base.extension() == ".json" || base.extension() == ".txt") base.replace_extension();
  return base;
}

void write_outputs(const fs::path& base, const json& report, const std::string& table) {
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  fs::path json_file = base;
  json_file += ".json";
  fs::path text_file = base;
  text_file += ".txt";
  write_json_file(json_file.string(), report);
  std::ofstream(text_file) << table;
  std::cout << table << "\nwrote " << json_file.string() << " and " << text_file.string() << "\n";
}

int finish(const std::vector<check_outcome>& checks, bool check_mode) {
  if (!check_mode) return 0;
  if (all_passed(checks)) return 0;
  std::cerr << "check failed\n";
  return 1;
}

int cmd_run_experiment(const std::string& file, const std::string& out, bool check) {
  const auto c = load_config(file);
  const auto r = run_experiment(c);
  write_outputs(output_base(file, c.output, out), report_json(r), report_table(r));
  return finish(evaluate_checks(r), check);
}

int cmd_tracking(const std::string& file, const std::string& out, bool check) {
  const auto c = load_config(file);
  const auto r = tracking_comparison(c);
  write_outputs(output_base(file, c.output, out), report_json(r), report_table(r));
  return finish(evaluate_checks(r), check);
}

int cmd_verify_kernel(std::size_t instances, std::uint64_t seed, bool check) {
  const auto r = kernel_suite(instances, seed);
  std::printf("instances            %zu (seed %llu)\n", instances, static_cast<unsigned long long>(seed));
  std::printf("max row-sum error    %.3e\n", r.row_sum_error);
  std::printf("max stationarity     %.3e\n", r.stationarity);
  std::printf("max fixed-point gap  %.3e\n", r.fixed_point);
  std::printf("max identity         %.3e\n", r.identity);
  std::printf("max rho              %.6f\n", r.rho_max);
  std::printf("non-geometric        %zu\n", r.non_geometric);
  std::printf("%s\n", r.passed() ? "PASS" : "FAIL");
  return check && !r.passed() ? 1 : 0;
}

int cmd_simulate(const std::string& model, std::uint64_t seed, std::size_t horizon, const std::string& out) {
  experiment_config c;
  c.model = model;
  c.horizon = horizon;
  c.validate();
  json doc;
  if (model == "linear-gaussian") {
    const linear_gaussian_spec spec{doubly_stochastic(static_cast<Eigen::Index>(c.dimension), c.matrix_seed),
                                    c.sigma_v, c.sigma_w};
    const linear_gaussian<2> m(spec);
    json s{{"dimension", c.dimension}, {"sigma_v", c.sigma_v}, {"sigma_w", c.sigma_w}, {"matrix_seed", c.matrix_seed}};
    doc = dataset_to_json(model, s, simulate(m, horizon, seed));
  } else if (model == "kitagawa") {
    const kitagawa m({c.var_v, c.var_w, c.initial_var});
    json s{{"var_v", c.var_v}, {"var_w", c.var_w}, {"initial_var", c.initial_var}};
    doc = dataset_to_json(model, s, simulate(m, horizon, seed));
  } else {
    const auto spec = tracking_spec_of(c);
    json s{{"noise_scale", spec.noise_scale},
           {"bearing_var", spec.bearing_var},
           {"observe_probability", spec.observe_probability},
           {"grid", spec.grid}};
    doc = dataset_to_json(model, s, simulate_tracking(spec, horizon, seed));
  }
  fs::path file = out;
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  write_json_file(file.string(), doc);
  std::cout << "wrote " << file.string() << " (" << model << ", " << horizon << " steps, seed " << seed << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequentially interacting MCMC experiments"};
  app.set_version_flag("--version", SIMCMC_VERSION);
  app.require_subcommand(1);

  std::string config_file, out;
  bool check = false;

  auto* run = app.add_subcommand("run-experiment", "replicated log-likelihood experiment");
  run->add_option("config", config_file, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "report path without extension");
  run->add_flag("--check", check, "exit nonzero if a configured check fails");

  auto* track = app.add_subcommand("tracking", "budgeted tracking comparison");
  track->add_option("config", config_file, "JSON config")->required()->check(CLI::ExistingFile);
  track->add_option("--out", out, "report path without extension");
  track->add_flag("--check", check, "exit nonzero if the sign test fails");

  std::size_t instances = 100;
  std::uint64_t seed = 1;
  auto* verify = app.add_subcommand("verify-kernel", "exact kernel checks on random discrete instances");
  verify->add_option("--instances", instances, "number of instances")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "base seed");
  verify->add_flag("--check", check, "exit nonzero on failure");

  std::string model;
  std::size_t horizon = 100;
  auto* sim = app.add_subcommand("simulate", "simulate a dataset");
  sim->add_option("model", model, "model")
      ->required()
      ->check(CLI::IsMember({"linear-gaussian", "kitagawa", "tracking"}));
  sim->add_option("--seed", seed, "data seed")->required();
  sim->add_option("--out", out, "output JSON file")->required();
  sim->add_option("--horizon", horizon, "number of time steps")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run_experiment(config_file, out, check);
    if (*track) return cmd_tracking(config_file, out, check);
    if (*verify) return cmd_verify_kernel(instances, seed, check);
    if (*sim) return cmd_simulate(model, seed, horizon, out);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
