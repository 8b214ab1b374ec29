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

#ifndef AUCTION_RL_PPO_H_
#define AUCTION_RL_PPO_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auction_rl/env.h"
#include "auction_rl/neural.h"
#include "auction_rl/strategy.h"

namespace auction_rl {

// One decision of one agent.
struct Step {
  std::vector<double> features;
  double raw_action = 0.0;
  double reward = 0.0;
  double log_prob = 0.0;  // under the behavior policy
  double value = 0.0;     // V(s) at collection time
  bool episode_end = true;
};

// Steps in episode order; each episode ends with episode_end = true.
struct Trajectory {
  std::vector<Step> steps;
};

enum class SelfPlayMode { kSharedPolicy, kIndependentPolicies };

std::string SelfPlayModeName(SelfPlayMode mode);
SelfPlayMode ParseSelfPlayMode(const std::string& name);

struct PpoConfig {
  double clip = 0.2;
  double gamma = 1.0;
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  bool anneal_lr = false;
  double entropy_start = 1e-2;
  double entropy_end = 1e-4;
  int iterations = 500;
  int episodes_per_iteration = 512;
  int minibatch_size = 256;
  int epochs = 4;
  bool normalize_advantages = true;
  SelfPlayMode mode = SelfPlayMode::kSharedPolicy;
  std::vector<int> hidden = {64, 64};
  double init_log_std = -1.2039728043259361;  // log(0.3)
  int workers = 1;

  // Throws std::invalid_argument.
  void Validate() const;
  double EntropyCoefficient(int iteration) const;
  double LearningRateScale(int iteration) const;
};

std::vector<double> ComputeReturns(const Trajectory& trajectory, double gamma);

// R - V, normalized to zero mean and unit variance when requested and the
// batch has nonzero spread.
std::vector<double> ComputeAdvantages(const Trajectory& trajectory,
                                      std::span<const double> returns, bool normalize);

double ClippedSurrogate(double log_prob_new, double log_prob_old, double advantage,
                        double clip);

double ValueLoss(std::span<const double> values, std::span<const double> returns);

// Gradient of the mean surrogate plus entropy bonus over a batch. With
// clip = nullopt the surrogate is the plain ratio-weighted advantage.
// Returns the objective value.
double SurrogateGradient(const GaussianPolicy& policy, const Eigen::MatrixXd& features,
                         const Eigen::VectorXd& raw_actions,
                         const Eigen::VectorXd& old_log_probs,
                         const Eigen::VectorXd& advantages, std::optional<double> clip,
                         double entropy_coefficient, std::span<double> grad);

// Policies and critics for every seat. In shared mode both vectors hold one
// element used by all seats.
struct PolicySet {
  SelfPlayMode mode = SelfPlayMode::kSharedPolicy;
  std::vector<GaussianPolicy> policies;
  std::vector<ValueNet> values;

  const GaussianPolicy& ForSeat(int seat) const {
    return policies[mode == SelfPlayMode::kSharedPolicy ? 0 : seat];
  }
  int Index(int seat) const { return mode == SelfPlayMode::kSharedPolicy ? 0 : seat; }
};

PolicySet InitialPolicies(const AuctionSpec& spec, const PpoConfig& config, uint64_t seed);

// Mean-bid profile of the policies, clamped to [0, bid_cap].
StrategyProfile MeanProfile(const AuctionSpec& spec, const PolicySet& set);

struct IterationLog {
  int iteration = 0;
  double mean_reward_per_agent = 0.0;
  double policy_std = 0.0;
  std::optional<double> oracle_l2;
  std::optional<double> oracle_linf;
  std::optional<double> exploitability;
  double wall_time_s = 0.0;
};

struct OracleDistance {
  double l2 = 0.0;
  double linf = 0.0;
};

struct TrainHooks {
  std::function<std::optional<OracleDistance>(const PolicySet&)> oracle_error;
  std::function<double(const PolicySet&, int iteration)> exploitability;
  int exploitability_every = 50;
  std::function<void(const IterationLog&)> on_iteration;
};

struct TrainResult {
  PolicySet policies;
  std::vector<IterationLog> log;
  int iterations_completed = 0;
  std::optional<std::string> divergence;  // set when training aborted
};

// Collects `episodes` self-play episodes; returns one trajectory per policy.
std::vector<Trajectory> CollectEpisodes(const AuctionSpec& spec, const PolicySet& set,
                                        int episodes, uint64_t seed, int workers = 1);

TrainResult Train(const AuctionSpec& spec, const PpoConfig& config, uint64_t seed,
                  const TrainHooks& hooks = {});

// One epoch over the whole batch per iteration, no clipping.
TrainResult TrainVanillaPg(const AuctionSpec& spec, const PpoConfig& config, uint64_t seed,
                           const TrainHooks& hooks = {});

}  // namespace auction_rl

#endif  // AUCTION_RL_PPO_H_
