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

#ifndef AUCTION_RL_FICTITIOUS_H_
#define AUCTION_RL_FICTITIOUS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "auction_rl/env.h"

namespace auction_rl {

// Private-value auction restricted to finite valuation and bid grids, with
// payoffs tabulated through Settle.
class DiscretizedGame {
 public:
  // `valuations[i]` and `weights[i]` describe player i's type distribution.
  DiscretizedGame(const AuctionSpec& spec, std::vector<std::vector<double>> valuations,
                  std::vector<std::vector<double>> weights, std::vector<double> bids);

  const AuctionSpec& spec() const { return spec_; }
  int num_players() const { return spec_.num_bidders; }
  int num_bids() const { return static_cast<int>(bids_.size()); }
  int num_valuations(int player) const { return static_cast<int>(valuations_[player].size()); }
  const std::vector<double>& bids() const { return bids_; }
  const std::vector<double>& valuations(int player) const { return valuations_[player]; }
  const std::vector<double>& weights(int player) const { return weights_[player]; }
  // Largest distance between adjacent bids.
  double BidStep() const;

  // Utility to `player` with valuation index v bidding b against the
  // opponents' bid indices (in seat order, skipping the player).
  double Payoff(int player, int v, int b, std::span<const int> opponent_bids) const;

 private:
  size_t OpponentIndex(std::span<const int> opponent_bids) const;

  AuctionSpec spec_;
  std::vector<std::vector<double>> valuations_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> bids_;
  std::vector<std::vector<double>> payoffs_;  // [player][(v * B + b) * B^(n-1) + opp]
};

// Quantile-midpoint valuations (equal weights) and an evenly spaced bid grid
// on [0, bid_cap]. Private-value specs only.
DiscretizedGame Discretize(const AuctionSpec& spec, int num_valuations, int num_bids);

// Row v holds player's bid distribution at valuation index v.
struct EmpiricalStrategy {
  std::vector<std::vector<double>> probs;
  std::vector<std::vector<int64_t>> play_counts;

  static EmpiricalStrategy Uniform(int num_valuations, int num_bids);
  static EmpiricalStrategy Pure(std::span<const int> bid_index, int num_bids);
  double MeanBid(int v, std::span<const double> bids) const;
};

using Profile = std::vector<EmpiricalStrategy>;

// Expected utility of every (valuation, bid) pair against the opponents.
std::vector<std::vector<double>> InterimUtilities(const DiscretizedGame& game,
                                                  const Profile& profile, int player);

// Bid index per valuation index; ties go to the lowest bid.
std::vector<int> ExactBestResponse(const DiscretizedGame& game, const Profile& profile,
                                   int player);

// Per player: expected gain of the best response over the strategy.
std::vector<double> ExactExploitability(const DiscretizedGame& game, const Profile& profile);

// Per player: ex-ante expected utility of the profile.
std::vector<double> ExpectedUtilities(const DiscretizedGame& game, const Profile& profile);

struct FpTrace {
  std::vector<int> iterations;             // iterations with a stored profile
  std::vector<Profile> profiles;           // parallel to iterations
  std::vector<std::vector<double>> exploitability;  // one row per iteration 1..T
  std::vector<std::vector<double>> values;          // expected utility per player
  Profile final_profile;
};

// Step size t^(-alpha_power), best-response slack epsilon0 * t^(-epsilon_power)
// and perturbation half-width perturbation0 * t^(-perturbation_power).
struct GwfpSchedule {
  double alpha_power = 1.0;
  double epsilon0 = 0.0;
  double epsilon_power = 1.0;
  double perturbation0 = 0.0;
  double perturbation_power = 1.0;

  void Validate() const;  // throws std::invalid_argument
  double Alpha(int t) const;
  double Epsilon(int t) const;
  double Perturbation(int t) const;
};

// Simultaneous best responses averaged with weight 1/t, from uniform play.
FpTrace FpIterate(const DiscretizedGame& game, int iterations, int record_every = 1);

FpTrace GwfpIterate(const DiscretizedGame& game, int iterations,
                    const GwfpSchedule& schedule, uint64_t seed, int record_every = 1);

// CSV matrix (rows = valuations, columns = bids) behind a '#'-prefixed JSON
// header line.
void WriteStrategyCsv(const std::string& path, const DiscretizedGame& game,
                      const Profile& profile, const std::string& auction);

}  // namespace auction_rl

#endif  // AUCTION_RL_FICTITIOUS_H_
