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

// Interim (per-type) expected utility of sealed-bid deviations. The other
// bidders' types and bids are drawn once and summarized; any candidate bid
// is then scored against the same draws (common random numbers).

#ifndef AUCTION_RL_INTERIM_H_
#define AUCTION_RL_INTERIM_H_

#include <span>
#include <vector>

#include "auction_rl/env.h"
#include "auction_rl/strategy.h"

namespace auction_rl {

struct OpponentDraw {
  double top = -1.0;     // highest opposing bid (-1 when there is none)
  double second = -1.0;  // second-highest opposing bid
  int top_count = 0;     // opponents bidding exactly `top`
  double value = 0.0;    // value of the item to the deviating bidder
};

class InterimEvaluator {
 public:
  InterimEvaluator(const AuctionSpec& spec, int bidder);

  // Draws `samples` opponent profiles conditional on the bidder's type and
  // records what the deviating bidder faces in each.
  std::vector<OpponentDraw> Draw(const StrategyProfile& profile, double own_type,
                                 int samples, Rng& rng) const;

  // Reward of bidding `bid` against one draw. Agrees with Settle.
  double Utility(const OpponentDraw& draw, double bid) const;

  // Mean utility of `bid` over all draws.
  double MeanUtility(std::span<const OpponentDraw> draws, double bid) const;

  // MeanUtility for every bid, equal up to rounding. Sorts the draws by the
  // highest opposing bid and uses prefix sums when the winner's surplus is
  // affine in the bid; otherwise scans the draws in cache-sized blocks.
  std::vector<double> MeanUtilities(std::span<const OpponentDraw> draws,
                                    std::span<const double> bids) const;

 private:
  AuctionSpec spec_;
  int bidder_;
};

}  // namespace auction_rl

#endif  // AUCTION_RL_INTERIM_H_
