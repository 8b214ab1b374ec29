// Copyright 2026 The auction_rl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: run, verify, list-presets, eval-exploitability
// and dump-strategy.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "auction_rl/experiment.h"
#include "json.hpp"

namespace {

using auction_rl::ConfigError;
using auction_rl::ExperimentConfig;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct RunArgs {
  std::string config;
  std::string preset;
  std::optional<uint64_t> seed;
  std::string out;
  std::optional<int> workers;
};

ExperimentConfig ResolveConfig(const RunArgs& args) {
  if (args.config.empty() == args.preset.empty()) {
    throw ConfigError("give exactly one of --config or --preset");
  }
  ExperimentConfig config = args.config.empty() ? auction_rl::Preset(args.preset)
                                                 : auction_rl::LoadConfig(args.config);
  if (args.seed) config.seed = *args.seed;
  if (!args.out.empty()) config.output_dir = args.out;
  if (args.workers) config.ppo.workers = *args.workers;
  config.Validate();
  return config;
}

std::string Format(const std::optional<double>& x) {
  if (!x) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *x);
  return buf;
}

int Run(const RunArgs& args) {
  const ExperimentConfig config = ResolveConfig(args);
  if (config.ppo.workers > 1) {
    std::cerr << "note: --workers > 1 collects episodes in parallel; results are still "
                 "seeded per episode but bit-reproducibility is not promised\n";
  }
  const auction_rl::RunResult result = auction_rl::RunExperiment(config);
  std::cout << "run " << config.name << " -> " << config.output_dir << "\n"
            << "  iterations:     " << result.iterations_completed << "\n"
            << "  oracle Linf:    " << Format(result.final_oracle_linf) << "\n"
            << "  exploitability: " << Format(result.final_exploitability) << "\n"
            << "  status:         " << result.message << "\n";
  return result.exit_code;
}

int VerifyRun(const std::string& run_dir, std::optional<double> linf, std::optional<double> eps,
              bool json) {
  std::optional<auction_rl::Thresholds> thresholds;
  if (linf || eps) {
    thresholds = auction_rl::LoadConfig(run_dir + "/config.json").evaluation.thresholds;
    if (linf) thresholds->oracle_linf = linf;
    if (eps) thresholds->exploitability = eps;
  }
  const auction_rl::VerifyReport report = auction_rl::Verify(run_dir, thresholds);
  if (json) {
    nlohmann::ordered_json out;
    out["passed"] = report.Passed();
    out["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
      out["checks"].push_back(
          {{"criterion", c.criterion},
           {"value", c.value ? nlohmann::ordered_json(*c.value) : nullptr},
           {"threshold", c.threshold ? nlohmann::ordered_json(*c.threshold) : nullptr},
           {"result", c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL")},
           {"note", c.note}});
    }
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& c : report.checks) {
      std::cout << (c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL")) << " " << c.criterion
                << " value=" << Format(c.value) << " threshold=" << Format(c.threshold);
      if (!c.note.empty()) std::cout << " (" << c.note << ")";
      std::cout << "\n";
    }
    std::cout << (report.Passed() ? "PASS" : "FAIL") << "\n";
  }
  return report.Passed() ? 0 : kExitFailure;
}

int ListPresets(const std::string& show) {
  if (!show.empty()) {
    std::cout << auction_rl::ConfigToJson(auction_rl::Preset(show));
    return 0;
  }
  for (const auto& p : auction_rl::ListPresets()) {
    std::cout << p.name << "\t" << p.description << "\n";
  }
  return 0;
}

int EvalExploitability(const std::string& run_dir, const auction_rl::ExploitabilityOptions& o) {
  const auction_rl::ExploitabilityReport report =
      auction_rl::EvaluateRunExploitability(run_dir, o);
  std::cout << "agent,epsilon,std_error,bid_grid,samples,type_grid\n";
  for (const auto& a : report.agents) {
    std::cout << a.agent << "," << a.epsilon << "," << a.std_error << "," << a.bid_grid_size
              << "," << a.samples << "," << a.type_grid_size << "\n";
  }
  std::cout << "# headline epsilon " << report.Headline() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium learning in auctions with PPO, fictitious play and NFSP"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Train one experiment and write its artifacts");
  run->add_option("--config", run_args.config, "Experiment config (JSON)");
  run->add_option("--preset", run_args.preset, "Bundled preset name");
  run->add_option("--seed", run_args.seed, "Override the config seed");
  run->add_option("--out", run_args.out, "Override the output directory");
  run->add_option("--workers", run_args.workers, "Parallel episode collection threads")
      ->check(CLI::PositiveNumber);

  std::string verify_dir;
  std::optional<double> verify_linf;
  std::optional<double> verify_eps;
  bool verify_json = false;
  CLI::App* verify = app.add_subcommand("verify", "Check a run directory against thresholds");
  verify->add_option("--run", verify_dir, "Run directory")->required();
  verify->add_option("--oracle-linf", verify_linf, "Override the oracle Linf threshold");
  verify->add_option("--exploitability", verify_eps, "Override the exploitability threshold");
  verify->add_flag("--json", verify_json, "Print the report as JSON");

  std::string show;
  CLI::App* list = app.add_subcommand("list-presets", "List bundled presets");
  list->add_option("--show", show, "Print the resolved config of one preset");

  std::string eval_dir;
  auction_rl::ExploitabilityOptions eval_options;
  CLI::App* eval = app.add_subcommand("eval-exploitability",
                                      "Re-estimate exploitability of a frozen checkpoint");
  eval->add_option("--run", eval_dir, "Run directory")->required();
  eval->add_option("--bid-grid", eval_options.bid_grid, "Best-response bid grid size");
  eval->add_option("--samples", eval_options.mc_samples, "Monte Carlo samples per type");
  eval->add_option("--type-grid", eval_options.type_grid, "Type grid size");
  eval->add_option("--seed", eval_options.seed, "Evaluation seed");

  std::string dump_dir;
  std::string dump_out;
  CLI::App* dump = app.add_subcommand("dump-strategy", "Write a run's strategy as CSV");
  dump->add_option("--run", dump_dir, "Run directory")->required();
  dump->add_option("--out", dump_out, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return Run(run_args);
    if (verify->parsed()) return VerifyRun(verify_dir, verify_linf, verify_eps, verify_json);
    if (list->parsed()) return ListPresets(show);
    if (eval->parsed()) return EvalExploitability(eval_dir, eval_options);
    if (dump->parsed()) {
      auction_rl::DumpStrategy(dump_dir, dump_out);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
