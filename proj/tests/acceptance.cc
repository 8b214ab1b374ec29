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

// Acceptance runner. Prints one PASS/FAIL line per criterion; diagnostics go
// to stderr. Exit status is nonzero when any selected criterion fails.
//
//   auction_rl_acceptance [--criterion N]... [--work-dir DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "auction_rl/experiment.h"
#include "auction_rl/fictitious.h"
#include "auction_rl/metrics.h"
#include "auction_rl/nfsp.h"
#include "auction_rl/oracles.h"
#include "gradient_checks.h"
#include "micro_game.h"
#include "test_util.h"

namespace auction_rl {
namespace {

namespace fs = std::filesystem;

// Wall-clock budgets, in seconds.
constexpr double kPresetBudget = 15 * 60;
constexpr double kOracleSuiteBudget = 5 * 60;
constexpr double kGradientSuiteBudget = 2 * 60;
constexpr double kFpBudget = 5 * 60;
constexpr double kNfspBudget = 20 * 60;
constexpr double kRevenueBudget = 60;

// Monte-Carlo draws per best-response evaluation in the fixed-point suite.
constexpr int kFixedPointSamples = 1000000;
// spa_common has a near-flat interim utility around its equilibrium bid.
constexpr double kPlateauToleranceSe = 2.0;

struct Verdict {
  bool passed = true;
  std::vector<std::string> notes;

  void Require(bool ok, const std::string& note) {
    passed = passed && ok;
    notes.push_back(note + (ok ? "" : " [FAIL]"));
  }
};

std::string Fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct PresetRun {
  ExperimentConfig config;
  RunResult result;
  VerifyReport report;
  double seconds = 0.0;
  fs::path dir;
};

PresetRun RunPreset(const std::string& name, const fs::path& work, const Thresholds& limits) {
  PresetRun run;
  run.config = Preset(name);
  run.dir = work / name;
  fs::remove_all(run.dir);
  run.config.output_dir = run.dir.string();
  std::cerr << "running preset " << name << " ..." << std::endl;
  const Stopwatch clock;
  run.result = RunExperiment(run.config);
  run.seconds = clock.Seconds();
  run.report = Verify(run.dir.string(), limits);
  return run;
}

// Checks a trained preset against pinned thresholds and the time budget.
void CheckPreset(Verdict& out, const std::string& name, const fs::path& work,
                 std::optional<double> linf, double eps, bool monotone = false) {
  Thresholds limits;
  limits.oracle_linf = linf;
  limits.exploitability = eps;
  limits.require_monotone = monotone;
  const PresetRun run = RunPreset(name, work, limits);
  out.Require(run.result.exit_code == 0, name + " " + run.result.message);
  for (const CheckResult& c : run.report.checks) {
    if (c.skipped && c.criterion == "oracle_linf" && !linf) continue;
    std::ostringstream s;
    s << name << " " << c.criterion << "=" << (c.value ? Fmt("%.4g", *c.value) : "n/a");
    if (c.threshold) s << " (<= " << Fmt("%.4g", *c.threshold) << ")";
    out.Require(c.passed && !c.skipped, s.str());
  }
  out.Require(run.seconds <= kPresetBudget,
              name + Fmt(" time=%.0fs (<= %.0fs)", run.seconds, kPresetBudget));
}

Verdict Criterion1(const fs::path& work) {
  Verdict out;
  CheckPreset(out, "fpa_uniform", work, 0.05, 0.01);
  return out;
}

Verdict Criterion2(const fs::path& work) {
  Verdict out;
  CheckPreset(out, "spa_uniform", work, 0.05, 0.01);
  return out;
}

Verdict Criterion3(const fs::path& work) {
  Verdict out;
  CheckPreset(out, "all_pay", work, 0.07, 0.015);
  return out;
}

Verdict Criterion4(const fs::path& work) {
  Verdict out;
  const ExperimentConfig c = Preset("third_price");
  out.Require(c.evaluation.curve_from == 0.1 && c.evaluation.curve_to == 0.9,
              "third_price curve on v in [0.1, 0.9]");
  CheckPreset(out, "third_price", work, 0.10, 0.02);
  return out;
}

Verdict Criterion5(const fs::path& work) {
  Verdict out;
  for (const char* name : {"fpa_power", "fpa_risk_averse", "fpa_common", "spa_common"}) {
    CheckPreset(out, name, work, 0.07, 0.015);
  }
  return out;
}

Verdict Criterion6(const fs::path& work) {
  Verdict out;
  CheckPreset(out, "fpa_asymmetric", work, std::nullopt, 0.015, true);
  CheckPreset(out, "korean", work, std::nullopt, 0.015);
  return out;
}

Verdict Criterion7(const fs::path& work) {
  Verdict out;
  constexpr double kReserve = 0.25;
  // The reserve formula is checked as a best-response fixed point first.
  const AuctionSpec spec = BenchmarkSpec(AuctionId::kFpaReserve);
  const std::vector<double> grid = LinearGrid(0.0, 1.0, 201);
  double worst = 0.0;
  for (double v : {0.3, 0.45, 0.6, 0.75, 0.9, 1.0}) {
    const GridBestResponse br = BestResponseGrid(spec, OracleProfile(AuctionId::kFpaReserve),
                                                 0, v, grid, 100000, DeriveSeed(7, {0}));
    worst = std::max(worst, std::abs(br.best_bid - *ReserveOracleBid(v, kReserve)));
  }
  out.Require(worst <= 0.005 + 0.02, Fmt("reserve formula fixed-point gap=%.4f (<= %.3f)",
                                         worst, 0.025));

  CheckPreset(out, "fpa_reserve", work, 0.05, 0.01);
  const StrategyProfile learned = LoadRunProfile((work / "fpa_reserve").string());
  EpisodeState s;
  s.type = kReserve + 0.01;
  const double bid = learned[0](s);
  out.Require(std::abs(bid - kReserve) <= 0.05,
              Fmt("bid at v=0.26 is %.4f (|b - r| <= 0.05, r = %.2f)", bid, kReserve));
  return out;
}

Verdict Criterion8(const fs::path&) {
  Verdict out;
  const Stopwatch clock;
  for (AuctionId id : kAllAuctions) {
    if (!Oracle(id).has_closed_form && id != AuctionId::kFpaReserve) continue;
    const AuctionSpec spec = BenchmarkSpec(id);
    const std::vector<double> grid = LinearGrid(0.0, spec.bid_cap, 201);
    const double step = spec.bid_cap / 200;
    const StrategyProfile profile = OracleProfile(id);
    const auto [lo, hi] = spec.TypeSupport(0);
    double worst = 0.0;
    int k = 0;
    for (double type : MidpointGrid(lo, hi, 21)) {
      const GridBestResponse br =
          BestResponseGrid(spec, profile, 0, type, grid, kFixedPointSamples,
                           DeriveSeed(8, {static_cast<uint64_t>(id), static_cast<uint64_t>(k++)}),
                           id == AuctionId::kSpaCommon ? kPlateauToleranceSe : 0.0);
      worst = std::max(worst, std::abs(br.best_bid - *ReferenceBid(id, type)));
    }
    out.Require(worst <= step + 0.02, AuctionIdName(id) + Fmt(" max|BR - oracle|=%.4f (<= %.4f)",
                                                               worst, step + 0.02));
  }
  const double seconds = clock.Seconds();
  out.Require(seconds <= kOracleSuiteBudget,
              Fmt("time=%.0fs (<= %.0fs)", seconds, kOracleSuiteBudget));
  return out;
}

Verdict Criterion9(const fs::path&) {
  Verdict out;
  const Stopwatch clock;
  Rng rng(9);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    worst = std::max(worst, testing::RandomGradientCase(k, rng).error);
  }
  out.Require(worst <= 1e-4, Fmt("backprop vs central differences: max rel err=%.2e (<= 1e-4)",
                                 worst));
  const testing::EglpResult eglp = testing::CheckExpectedScore(100000, 9);
  out.Require(eglp.components > 0 && eglp.worst_z <= 4.0,
              Fmt("expected score: max |mean|/SE=%.2f over %.0f components (<= 4)",
                  eglp.worst_z, eglp.components));
  double gap = 0.0;
  for (uint64_t seed = 0; seed < 10; ++seed) gap = std::max(gap, testing::PpoVanillaGap(256, seed));
  out.Require(gap <= 1e-6, Fmt("clipped vs vanilla gradient at old policy: rel diff=%.2e (<= 1e-6)",
                               gap));
  const double seconds = clock.Seconds();
  out.Require(seconds <= kGradientSuiteBudget,
              Fmt("time=%.0fs (<= %.0fs)", seconds, kGradientSuiteBudget));
  return out;
}

Verdict Criterion10(const fs::path& work) {
  Verdict out;
  const testing::EnumerationCheck micro = testing::CheckMicroGame();
  out.Require(micro.mismatches == 0,
              Fmt("micro-game enumeration: %.0f mismatches in %.0f profiles", micro.mismatches,
                  micro.profiles));

  {
    const PresetRun fp = RunPreset("fp_fpa", work, Thresholds{});
    const DiscretizedGame game = Discretize(fp.config.auction, fp.config.fp.num_valuations,
                                            fp.config.fp.num_bids);
    const double limit = 2 * game.BidStep();
    const double eps = *fp.result.final_exploitability;
    out.Require(fp.config.fp.iterations <= 2000 && eps <= limit,
                Fmt("FP exact exploitability=%.5f (<= %.3f) after 2000 iterations", eps, limit));
    out.Require(fp.seconds <= kFpBudget, Fmt("FP time=%.0fs (<= %.0fs)", fp.seconds, kFpBudget));
  }

  {
    const DiscretizedGame game = Discretize(BenchmarkSpec(AuctionId::kFpaUniform), 21, 51);
    const FpTrace a = FpIterate(game, 300, 1);
    const FpTrace b = GwfpIterate(game, 300, GwfpSchedule{}, 12345, 1);
    bool same = a.exploitability == b.exploitability && a.profiles.size() == b.profiles.size();
    for (size_t k = 0; same && k < a.profiles.size(); ++k) {
      for (int i = 0; i < game.num_players(); ++i) {
        same = same && a.profiles[k][i].probs == b.profiles[k][i].probs;
      }
    }
    out.Require(same, "GWFP reduction schedule reproduces FP bit-exactly (300 iterations)");
  }

  {
    const PresetRun nfsp = RunPreset("nfsp_fpa", work, Thresholds{});
    out.Require(nfsp.result.exit_code == 0, "NFSP " + nfsp.result.message);
    const AuctionSpec& spec = nfsp.config.auction;
    const DiscretizedGame game = Discretize(spec, 21, nfsp.config.nfsp.num_bids);
    const double limit = game.BidStep() + 0.03;
    const StrategyProfile profile = LoadRunProfile(nfsp.dir.string());
    double worst = 0.0;
    for (int i = 0; i < game.num_players(); ++i) {
      for (double v : game.valuations(i)) {
        EpisodeState s;
        s.bidder_id = i;
        s.type = v;
        worst = std::max(worst, std::abs(profile[i](s) - v / 2));
      }
    }
    out.Require(worst <= limit,
                Fmt("NFSP max|mean bid - v/2| on grid=%.4f (<= %.3f)", worst, limit));
    out.Require(nfsp.seconds <= kNfspBudget,
                Fmt("NFSP time=%.0fs (<= %.0fs)", nfsp.seconds, kNfspBudget));
  }
  return out;
}

Verdict Criterion11(const fs::path&) {
  Verdict out;
  const Stopwatch clock;
  constexpr int kEpisodes = 1000000;
  const double fpa = ComputeAuctionStats(BenchmarkSpec(AuctionId::kFpaUniform),
                                         OracleProfile(AuctionId::kFpaUniform), kEpisodes, 111)
                         .mean_revenue;
  const double spa = ComputeAuctionStats(BenchmarkSpec(AuctionId::kSpaUniform),
                                         OracleProfile(AuctionId::kSpaUniform), kEpisodes, 222)
                         .mean_revenue;
  out.Require(std::abs(fpa - spa) <= 0.005, Fmt("revenue FPA=%.5f SPA=%.5f", fpa, spa));
  out.Require(std::abs(fpa - 1.0 / 3) <= 0.005 && std::abs(spa - 1.0 / 3) <= 0.005,
              "both within 0.005 of 1/3");
  const double seconds = clock.Seconds();
  out.Require(seconds <= kRevenueBudget, Fmt("time=%.0fs (<= %.0fs)", seconds, kRevenueBudget));
  return out;
}

// Re-runs every preset twice with the same seed on a shortened budget.
Verdict Criterion12(const fs::path& work) {
  Verdict out;
  int identical = 0, total = 0;
  for (const PresetInfo& p : ListPresets()) {
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
      ExperimentConfig c = Preset(p.name);
      c.ppo.iterations = std::min(c.ppo.iterations, 12);
      c.nfsp.iterations = std::min(c.nfsp.iterations, 150);
      c.evaluation.exploitability_every = 5;
      c.evaluation.periodic_samples = 500;
      c.evaluation.exploitability_samples = 2000;
      const fs::path dir = work / "determinism" / (p.name + "_" + std::to_string(rep));
      fs::remove_all(dir);
      c.output_dir = dir.string();
      RunExperiment(c);
      bytes[rep] = testing::Slurp(dir / "metrics.csv");
    }
    ++total;
    const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
    identical += same;
    if (!same) std::cerr << "metrics.csv differs for " << p.name << "\n";
  }
  out.Require(identical == total,
              Fmt("%.0f of %.0f presets byte-identical on re-run", identical, total));
  return out;
}

}  // namespace
}  // namespace auction_rl

int main(int argc, char** argv) {
  using namespace auction_rl;
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  std::string work_dir = "acceptance_runs";
  app.add_option("--criterion", selected, "Criterion number (repeatable; default all)")
      ->check(CLI::Range(1, 12));
  app.add_option("--work-dir", work_dir, "Directory for run artifacts");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (int k = 1; k <= 12; ++k) selected.push_back(k);
  }
  const std::function<Verdict(const fs::path&)> criteria[] = {
      Criterion1, Criterion2, Criterion3, Criterion4,  Criterion5,  Criterion6,
      Criterion7, Criterion8, Criterion9, Criterion10, Criterion11, Criterion12};
  const fs::path work(work_dir);
  fs::create_directories(work);
  bool all = true;
  for (int k : selected) {
    Verdict out;
    try {
      out = criteria[k - 1](work);
    } catch (const std::exception& e) {
      out.Require(false, std::string("error: ") + e.what());
    }
    all = all && out.passed;
    std::cout << "criterion " << k << ": " << (out.passed ? "PASS" : "FAIL");
    for (size_t j = 0; j < out.notes.size(); ++j) std::cout << (j ? "; " : " | ") << out.notes[j];
    std::cout << std::endl;
  }
  return all ? 0 : 1;
}
