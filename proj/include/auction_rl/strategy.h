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

#ifndef AUCTION_RL_STRATEGY_H_
#define AUCTION_RL_STRATEGY_H_

#include <functional>
#include <vector>

#include "auction_rl/env.h"

namespace auction_rl {

// A deterministic bidding strategy: state -> bid. Evaluation code (best
// responses, exploitability, auction statistics) works on these.
using BidFunction = std::function<double(const EpisodeState&)>;

// One bid function per bidder seat.
using StrategyProfile = std::vector<BidFunction>;

// Replaces `fn` by piecewise-linear interpolation through `knots` evenly
// spaced samples over the bidder's type support (one curve per round/signal
// combination in the Korean format). Makes expensive network strategies
// cheap to query inside Monte-Carlo loops.
BidFunction TabulateBidFunction(const AuctionSpec& spec, int bidder,
                                const BidFunction& fn, int knots = 2001);

}  // namespace auction_rl

#endif  // AUCTION_RL_STRATEGY_H_
