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

// Closed-form Bayes-Nash bidding strategies of the benchmark auctions and a
// brute-force Monte-Carlo best response used to check them.

#ifndef AUCTION_RL_ORACLES_H_
#define AUCTION_RL_ORACLES_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "auction_rl/env.h"
#include "auction_rl/strategy.h"

namespace auction_rl {

struct OracleStrategy {
  AuctionId auction_id;
  std::function<double(double)> bid_fn;  // type -> equilibrium bid
  bool has_closed_form = false;
};

OracleStrategy Oracle(AuctionId id);

// Throws std::domain_error for auctions without a closed form
// (asymmetric, reserve price, Korean).
double OracleBid(AuctionId id, double type);

// Equilibrium of the two-bidder UNIF(0, 1) first-price auction with reserve
// r: b(v) = (v^2 + r^2) / (2v) for v >= r. Types below r abstain (nullopt).
std::optional<double> ReserveOracleBid(double v, double r);

// Strategy profile in which every seat plays the reference equilibrium.
// Covers the closed forms plus the reserve auction (abstaining types bid 0).
// Throws std::domain_error otherwise.
StrategyProfile OracleProfile(AuctionId id);

// Reference equilibrium bid for bid-curve comparisons, where one exists.
std::optional<double> ReferenceBid(AuctionId id, double type);

struct GridBestResponse {
  double best_bid = 0.0;
  double best_value = 0.0;
};

// Argmax over `bid_grid` of the Monte-Carlo expected utility of `bidder`
// holding `type` while the other seats play `profile`. Ties go to the lowest
// bid. With tie_tolerance_se > 0 a bid counts as tied with the maximum when
// its common-random-number difference is within that many standard errors,
// which resolves utility plateaus deterministically.
GridBestResponse BestResponseGrid(const AuctionSpec& spec,
                                  const StrategyProfile& profile, int bidder,
                                  double type, std::span<const double> bid_grid,
                                  int mc_samples, uint64_t seed,
                                  double tie_tolerance_se = 0.0);

// n evenly spaced points from lo to hi inclusive.
std::vector<double> LinearGrid(double lo, double hi, int n);

}  // namespace auction_rl

#endif  // AUCTION_RL_ORACLES_H_
