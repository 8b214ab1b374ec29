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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "auction_rl/experiment.h"
#include "doctest.h"
#include "json.hpp"
#include "test_util.h"

namespace auction_rl {
namespace {

namespace fs = std::filesystem;
using testing::ScratchDir;
using testing::Slurp;

int LineCount(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

// Short version of a preset for plumbing tests.
ExperimentConfig Quick(const std::string& preset, const fs::path& out, int iterations = 4) {
  ExperimentConfig c = Preset(preset);
  c.output_dir = out.string();
  c.ppo.iterations = iterations;
  c.ppo.episodes_per_iteration = 64;
  c.ppo.minibatch_size = 64;
  c.nfsp.iterations = iterations;
  c.fp.iterations = std::min(c.fp.iterations, 20);
  c.evaluation.exploitability_samples = 500;
  c.evaluation.periodic_samples = 200;
  c.evaluation.exploitability_every = 2;
  c.evaluation.exploitability_bid_grid = 41;
  return c;
}

int RunCli(const std::string& args) {
  const int status = std::system((std::string(AUCTION_RL_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string MinimalConfig(const std::string& extra = "") {
  return R"({"version": 1, "name": "t", "auction": {"benchmark": "fpa_uniform"})" + extra + "}";
}

TEST_SUITE("experiment") {

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(ParseConfig(MinimalConfig()));
  CHECK_THROWS_AS(ParseConfig(MinimalConfig(R"(, "algorythm": "ppo")")), ConfigError);
  CHECK_THROWS_AS(ParseConfig(MinimalConfig(R"(, "ppo": {"clip": 0.2, "lr": 1})")), ConfigError);
  CHECK_THROWS_AS(ParseConfig(MinimalConfig(R"(, "ppo": {"iterations": "many"})")), ConfigError);
  CHECK_THROWS_AS(ParseConfig(MinimalConfig(R"(, "ppo": {"iterations": 2.5})")), ConfigError);
  CHECK_THROWS_AS(ParseConfig(MinimalConfig(R"(, "algorithm": "sarsa")")), ConfigError);
  CHECK_THROWS_AS(ParseConfig(MinimalConfig(R"(, "seed": -1)")), ConfigError);
  CHECK_THROWS_AS(ParseConfig(MinimalConfig(R"(, "ppo": {"clip": -0.1})")), ConfigError);
  CHECK_THROWS_AS(ParseConfig(MinimalConfig(R"(, "evaluation": {"thresholds": {"linf": 1}})")),
                  ConfigError);
  CHECK_THROWS_AS(ParseConfig(R"({"name": "t", "auction": {"benchmark": "fpa_uniform"}})"),
                  ConfigError);
  CHECK_THROWS_AS(ParseConfig(R"({"version": 2, "auction": {"benchmark": "fpa_uniform"}})"),
                  ConfigError);
  CHECK_THROWS_AS(ParseConfig(R"({"version": 1})"), ConfigError);
  CHECK_THROWS_AS(ParseConfig("{not json"), ConfigError);
  CHECK_THROWS_AS(ParseConfig(R"({"version": 1, "auction": {"benchmark": "dutch"}})"),
                  ConfigError);
  CHECK_THROWS_AS(ParseConfig(R"({"version": 1, "auction": {"benchmark": "fpa_asymmetric"}})"),
                  ConfigError);  // shared policies need identical bidders
  CHECK_THROWS_AS(ParseConfig(R"({"version": 1, "algorithm": "fp",
                                  "auction": {"benchmark": "korean"}})"),
                  ConfigError);
}

TEST_CASE("auction fields override the benchmark") {
  const ExperimentConfig c = ParseConfig(
      R"({"version": 1, "auction": {"benchmark": "fpa_reserve", "reserve_price": 0.3},
          "seed": 12, "ppo": {"mode": "independent", "hidden": [8, 8]}})");
  CHECK(c.auction.reserve_price == 0.3);
  CHECK(c.auction.format == AuctionFormat::kFirstPrice);
  CHECK(c.seed == 12);
  CHECK(c.ppo.mode == SelfPlayMode::kIndependentPolicies);
  CHECK(c.ppo.hidden == std::vector<int>{8, 8});
  CHECK(c.ppo.clip == 0.2);
  const ExperimentConfig custom = ParseConfig(
      R"({"version": 1, "auction": {"format": "second_price", "num_bidders": 3,
          "valuation": {"kind": "private_uniform", "bounds": [[0, 1], [0, 1], [0, 1]]}}})");
  CHECK_FALSE(custom.benchmark.has_value());
  CHECK(custom.auction.num_bidders == 3);
}

TEST_CASE("presets") {
  const std::vector<PresetInfo> presets = ListPresets();
  std::set<std::string> names;
  for (const PresetInfo& p : presets) names.insert(p.name);
  for (AuctionId id : kAllAuctions) CHECK(names.count(AuctionIdName(id)) == 1);
  for (const char* extra : {"fp_micro", "fp_fpa", "gwfp_fpa", "nfsp_fpa", "nfsp_spa", "vpg_fpa"}) {
    CHECK(names.count(extra) == 1);
  }
  CHECK(presets[0].description == "First price, 2 bidders, UNIF(0,1)");
  CHECK_THROWS_AS(Preset("nope"), ConfigError);
  for (const PresetInfo& p : presets) {
    CAPTURE(p.name);
    const ExperimentConfig c = Preset(p.name);
    // The resolved snapshot parses back to the same configuration.
    CHECK(ConfigToJson(ParseConfig(ConfigToJson(c))) == ConfigToJson(c));
  }
}

TEST_CASE("bundled config files match the presets") {
  const fs::path dir = fs::path(AUCTION_RL_SOURCE_DIR) / "configs";
  int files = 0;
  for (const PresetInfo& p : ListPresets()) {
    CAPTURE(p.name);
    const fs::path file = dir / (p.name + ".json");
    REQUIRE(fs::exists(file));
    CHECK(ConfigToJson(LoadConfig(file.string())) == ConfigToJson(Preset(p.name)));
    ++files;
  }
  CHECK(files == static_cast<int>(ListPresets().size()));
}

TEST_CASE("a run writes every artifact") {
  const fs::path out = ScratchDir("run_fpa");
  const RunResult r = RunExperiment(Quick("fpa_uniform", out));
  CHECK(r.exit_code == 0);
  CHECK(r.iterations_completed == 4);
  for (const char* f : {"metrics.csv", "bid_curve.csv", "exploitability.csv", "checkpoint.txt",
                        "config.json", "run.log"}) {
    CHECK(fs::exists(out / f));
  }
  CHECK(LineCount(out / "bid_curve.csv") == 22);  // header + 21 types
  CHECK(LineCount(out / "metrics.csv") == 5);
  CHECK(Slurp(out / "metrics.csv").rfind(
            "iteration,mean_reward_per_agent,policy_std,oracle_L2,oracle_Linf,"
            "exploitability_eps,wall_time_s\n",
            0) == 0);
  // Periodic rows at iterations 2 and 4, two agents each.
  CHECK(LineCount(out / "exploitability.csv") == 5);
  CHECK(LoadConfig((out / "config.json").string()).ppo.iterations == 4);

  const ExperimentConfig loaded = LoadConfig((out / "config.json").string());
  const StrategyProfile profile = LoadRunProfile(out.string());
  CHECK(profile.size() == 2);
  ExploitabilityOptions o;
  o.mc_samples = 200;
  o.bid_grid = 21;
  o.symmetric = true;
  CHECK(EvaluateRunExploitability(out.string(), o).agents.size() == 2);
  DumpStrategy(out.string(), (out / "dump.csv").string());
  CHECK(LineCount(out / "dump.csv") == 102);
}

TEST_CASE("identical seeds give byte-identical metrics") {
  for (const char* preset : {"korean", "fpa_asymmetric", "gwfp_fpa", "nfsp_fpa"}) {
    CAPTURE(preset);
    const fs::path a = ScratchDir(std::string("det_a_") + preset);
    const fs::path b = ScratchDir(std::string("det_b_") + preset);
    RunExperiment(Quick(preset, a));
    RunExperiment(Quick(preset, b));
    CHECK(Slurp(a / "metrics.csv") == Slurp(b / "metrics.csv"));
    CHECK(Slurp(a / "exploitability.csv") == Slurp(b / "exploitability.csv"));
    CHECK(Slurp(a / "bid_curve.csv") == Slurp(b / "bid_curve.csv"));
  }
  const fs::path c = ScratchDir("det_c");
  ExperimentConfig other = Quick("korean", c);
  other.seed = 2;
  RunExperiment(other);
  const fs::path seed_one = fs::temp_directory_path() / "auction_rl_test_det_a_korean";
  CHECK(Slurp(c / "metrics.csv") != Slurp(seed_one / "metrics.csv"));
}

TEST_CASE("verify") {
  SUBCASE("an untrained policy fails with its distance reported") {
    const fs::path out = ScratchDir("verify_untrained");
    RunExperiment(Quick("fpa_uniform", out, 0));
    const VerifyReport report = Verify(out.string());
    CHECK_FALSE(report.Passed());
    REQUIRE(report.checks.size() == 2);
    CHECK(report.checks[0].criterion == "oracle_linf");
    CHECK_FALSE(report.checks[0].passed);
    REQUIRE(report.checks[0].value.has_value());
    CHECK(*report.checks[0].value > 0.05);
  }
  SUBCASE("korean skips the oracle check") {
    const fs::path out = ScratchDir("verify_korean");
    RunExperiment(Quick("korean", out));
    const VerifyReport report = Verify(out.string());
    CHECK(report.checks[0].skipped);
    CHECK_FALSE(report.checks[1].skipped);
    Thresholds loose;
    loose.exploitability = 10.0;
    CHECK(Verify(out.string(), loose).Passed());
  }
  SUBCASE("monotonicity") {
    const fs::path out = ScratchDir("verify_asym");
    RunExperiment(Quick("fpa_asymmetric", out));
    const VerifyReport report = Verify(out.string());
    REQUIRE(report.checks.size() == 3);
    CHECK(report.checks[2].criterion == "monotone");
  }
  SUBCASE("fictitious play on the micro-game passes a zero threshold") {
    const fs::path out = ScratchDir("verify_micro");
    RunExperiment(Quick("fp_micro", out));
    Thresholds zero;
    zero.exploitability = 0.0;
    zero.oracle_linf = 0.0;
    CHECK(Verify(out.string(), zero).Passed());
    CHECK(fs::exists(out / "strategy.csv"));
    CHECK(EvaluateRunExploitability(out.string(), {}).Headline() == 0.0);
  }
  CHECK_THROWS_AS(Verify(ScratchDir("verify_empty").string()), std::exception);
}

TEST_CASE("divergence aborts with partial artifacts") {
  const fs::path out = ScratchDir("diverge");
  ExperimentConfig c = Quick("fpa_uniform", out, 6);
  c.ppo.value_lr = 1e308;
  c.ppo.policy_lr = 1e308;
  const RunResult r = RunExperiment(c);
  CHECK(r.exit_code == 3);
  CHECK(fs::exists(out / "divergence.txt"));
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(r.iterations_completed < 6);
}

TEST_CASE("command line") {
  const fs::path dir = ScratchDir("cli");
  std::ofstream(dir / "bad.json") << MinimalConfig(R"(, "typo": 1)");
  CHECK(RunCli("run --config " + (dir / "bad.json").string()) == 2);
  CHECK(RunCli("run --preset no_such_preset") == 2);
  CHECK(RunCli("run") == 2);
  CHECK(RunCli("list-presets") == 0);
  CHECK(RunCli("list-presets --show korean") == 0);
  CHECK(RunCli("run --preset fp_micro --out " + (dir / "micro").string()) == 0);
  CHECK(RunCli("verify --run " + (dir / "micro").string()) == 0);
  CHECK(RunCli("verify --run " + (dir / "micro").string() + " --json") == 0);
  CHECK(RunCli("dump-strategy --run " + (dir / "micro").string() + " --out " +
               (dir / "s.csv").string()) == 0);
  CHECK(RunCli("eval-exploitability --run " + (dir / "micro").string()) == 0);
  CHECK(RunCli("verify --run " + (dir / "missing").string()) == 2);
}

}  // TEST_SUITE

}  // namespace
}  // namespace auction_rl
