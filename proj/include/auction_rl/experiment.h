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

#ifndef AUCTION_RL_EXPERIMENT_H_
#define AUCTION_RL_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "auction_rl/env.h"
#include "auction_rl/fictitious.h"
#include "auction_rl/metrics.h"
#include "auction_rl/nfsp.h"
#include "auction_rl/ppo.h"

namespace auction_rl {

// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { kPpo, kVanillaPg, kFp, kGwfp, kNfsp };

std::string AlgorithmName(Algorithm algorithm);
Algorithm ParseAlgorithm(const std::string& name);

struct FpSettings {
  int num_valuations = 21;
  int num_bids = 51;
  int iterations = 2000;
  int record_every = 10;
  // Explicit grids override the derived ones; valuations get equal weights.
  std::vector<double> valuation_grid;
  std::vector<double> bid_grid;
  GwfpSchedule schedule;  // gwfp only
};

struct Thresholds {
  std::optional<double> oracle_linf;
  std::optional<double> exploitability;
  bool require_monotone = false;
};

struct EvaluationSettings {
  int type_grid = 21;
  double curve_from = 0.05;  // fraction of the type support
  double curve_to = 0.95;
  int exploitability_bid_grid = 201;
  int exploitability_samples = 100000;
  int periodic_samples = 10000;
  int exploitability_every = 50;
  bool symmetric = true;  // evaluate seat 0 only when all seats share a policy
  bool record_wall_time = false;
  Thresholds thresholds;
};

struct ExperimentConfig {
  static constexpr int kVersion = 1;
  std::string name = "custom";
  std::string description;
  std::optional<AuctionId> benchmark;  // source of the reference bids
  AuctionSpec auction;
  Algorithm algorithm = Algorithm::kPpo;
  PpoConfig ppo;
  FpSettings fp;
  NfspConfig nfsp;
  uint64_t seed = 1;
  std::string output_dir = "runs/custom";
  EvaluationSettings evaluation;

  void Validate() const;  // throws ConfigError
};

// Strict JSON reading: unknown keys and malformed values throw ConfigError.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);
// Fully resolved JSON, including defaults.
std::string ConfigToJson(const ExperimentConfig& config);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> ListPresets();
// Throws ConfigError for an unknown name.
ExperimentConfig Preset(const std::string& name);

struct RunResult {
  int exit_code = 0;  // 0 done, 3 diverged
  std::string message;
  int iterations_completed = 0;
  std::optional<double> final_oracle_linf;
  std::optional<double> final_exploitability;
};

// Trains and writes metrics.csv, bid_curve.csv, exploitability.csv,
// checkpoint.txt (or strategy.csv), config.json and run.log under
// config.output_dir.
RunResult RunExperiment(const ExperimentConfig& config);

struct CheckResult {
  std::string criterion;
  std::optional<double> value;
  std::optional<double> threshold;
  bool passed = false;
  bool skipped = false;
  std::string note;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool Passed() const;
};

// Reads a completed run directory. Thresholds default to those stored in
// the run's config.json. Throws std::runtime_error on missing artifacts.
VerifyReport Verify(const std::string& run_dir,
                    const std::optional<Thresholds>& thresholds = std::nullopt);

// Re-evaluates the frozen policies of a run with Monte Carlo best responses.
ExploitabilityReport EvaluateRunExploitability(const std::string& run_dir,
                                               const ExploitabilityOptions& options);

// Writes the run's strategy: a probability matrix for discrete policies,
// mean and spread per type for Gaussian ones.
void DumpStrategy(const std::string& run_dir, const std::string& out_path);

// Mean-bid profile stored in a run directory.
StrategyProfile LoadRunProfile(const std::string& run_dir, ExperimentConfig* config = nullptr);

}  // namespace auction_rl

#endif  // AUCTION_RL_EXPERIMENT_H_
