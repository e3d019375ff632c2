// SPDX-License-Identifier: Apache-2.0
//
// risgee run --config <file> --experiment {pmax-sweep|pcn-sweep|timing|single}
//            --profile {desk|paper} --out <dir> --trials <n> --seed <n> --methods <list>
//
// Exit codes: 0 success, 1 unexpected error, 2 configuration error, 3 trial
// failure rate above --max-failure-rate.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "risgee/config_io.hpp"
#include "risgee/harness.hpp"

namespace {

using namespace risgee;

constexpr int kExitConfig = 2;
constexpr int kExitFailures = 3;

struct Args {
  std::string config;
  std::string experiment;
  std::string profile = "desk";
  std::string out = "results";
  int trials = 0;  // 0: profile default
  long long seed = -1;
  std::string methods;
  double max_failure_rate = 0.05;
  int max_outer = 0;
};

std::vector<harness::MethodId> default_methods(const std::string& experiment) {
  using harness::MethodId;
  if (experiment == "pcn-sweep") return {MethodId::kMethod2Gee, MethodId::kPassiveMethod2};
  if (experiment == "single") return {MethodId::kMethod1Gee, MethodId::kMethod2Gee};
  return {MethodId::kMethod1Gee, MethodId::kMethod2Gee, MethodId::kMethod1Sr,
          MethodId::kMethod2Sr, MethodId::kUniformRandom};
}

harness::ExperimentSpec build_spec(const Args& a) {
  const harness::Profile prof = harness::profile(a.profile);
  nlohmann::json doc = harness::apply_profile(config_io::default_document(), prof);
  if (!a.config.empty()) doc = config_io::merge(doc, config_io::read_file(a.config));
  doc = config_io::apply_env(doc);
  if (a.seed >= 0) doc["seed"] = a.seed;

  harness::ExperimentSpec spec;
  spec.experiment = a.experiment;
  spec.config_document = doc;
  spec.base = config_io::to_config(doc);
  spec.options.seed = spec.base.seed;
  if (a.max_outer > 0) spec.options.max_outer = a.max_outer;
  spec.trials = a.trials > 0 ? a.trials : prof.trials;
  spec.methods = a.methods.empty() ? default_methods(a.experiment)
                                   : harness::parse_method_list(a.methods);
  if (a.experiment == "pmax-sweep") {
    spec.grid = prof.pmax_grid_dbw;
  } else if (a.experiment == "pcn-sweep") {
    spec.variable = harness::SweepVariable::kPcnDbm;
    spec.grid = prof.pcn_grid_dbm;
    spec.ris_sizes = prof.pcn_ris_sizes;
  } else if (a.experiment == "timing") {
    spec.grid = prof.timing_grid_dbw;
  } else {
    spec.grid = {doc.at("p_max_dbw").get<double>()};
    spec.keep_trajectories = true;
  }
  spec.validate();
  return spec;
}

void print_summary(const harness::SweepResult& r) {
  for (const auto& c : r.cells) {
    std::printf("%-10s %8s  N=%-4d %-16s GEE %.6g bits/J  iters %.1f  failures %d\n",
                harness::sweep_variable_name(r.variable).c_str(),
                harness::format_double(c.grid_value).c_str(), c.ris_elements,
                harness::method_id_name(c.method).c_str(), c.mean_gee, c.mean_iterations,
                c.failures);
  }
}

int run(const Args& a) {
  harness::ExperimentSpec spec;
  try {
    spec = build_spec(a);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  harness::SweepResult result;
  const std::string stem = a.experiment;
  if (a.experiment == "pcn-sweep") {
    result = harness::sweep_pcn(spec);
    print_summary(result);
    const auto active = spec.methods.front();
    const auto passive = harness::MethodId::kPassiveMethod2;
    const bool has_passive = std::find(spec.methods.begin(), spec.methods.end(), passive) !=
                             spec.methods.end();
    if (has_passive && active != passive) {
      for (const auto& x : harness::find_crossovers(result, active, passive)) {
        if (x.found) {
          std::printf("crossover N=%d: in [%g, %g] dBm, interpolated %.3f dBm\n", x.ris_elements,
                      x.lo, x.hi, x.estimate);
        } else if (x.below_grid) {
          std::printf("crossover N=%d: below grid\n", x.ris_elements);
        } else {
          std::printf("crossover N=%d: beyond grid\n", x.ris_elements);
        }
      }
    }
  } else if (a.experiment == "timing") {
    const auto table = harness::timing_table(spec);
    result = table.raw;
    std::fputs(harness::timing_table_csv(table).c_str(), stdout);
    std::printf("spearman(T1a/T1p, P_max) = %.3f\n", table.spearman_1a_1p);
    try {
      std::filesystem::create_directories(a.out);
      std::ofstream(std::filesystem::path(a.out) / "timing_ratios.csv")
          << harness::timing_table_csv(table);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  } else {
    result = harness::sweep_pmax(spec);
    print_summary(result);
  }

  try {
    for (const auto& p : harness::emit_results(result, spec, a.out, stem)) {
      std::printf("wrote %s\n", p.c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::printf("failure rate %.4f (%d of %d trials)\n", result.failure_rate(), result.failures,
              result.attempted);
  return result.failure_rate() > a.max_failure_rate ? kExitFailures : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GEE maximization for active-RIS uplinks: experiment runner"};
  app.require_subcommand(1);
  Args a;
  CLI::App* cmd = app.add_subcommand("run", "Run an experiment and write CSV / JSON results");
  cmd->add_option("--config", a.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--experiment", a.experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember({"pmax-sweep", "pcn-sweep", "timing", "single"}));
  cmd->add_option("--profile", a.profile, "Problem size profile")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--out", a.out, "Output directory");
  cmd->add_option("--trials", a.trials, "Monte-Carlo trials (default: profile)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "Channel and randomization seed (overrides config)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--methods", a.methods,
                  "Comma-separated subset of method1-gee,method2-gee,method1-sr,method2-sr,"
                  "uniform-random,passive-method1,passive-method2");
  cmd->add_option("--max-failure-rate", a.max_failure_rate,
                  "Exit with status 3 when the failed-trial fraction exceeds this")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--max-outer", a.max_outer, "Outer iteration cap (default 50)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    return run(a);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
