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

// Quantitative checks of a learned profile: Monte-Carlo exploitability,
// distance to a reference bid function, and auction-level statistics.

#ifndef AUCTION_RL_METRICS_H_
#define AUCTION_RL_METRICS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auction_rl/env.h"
#include "auction_rl/oracles.h"
#include "auction_rl/strategy.h"

namespace auction_rl {

struct AgentExploitability {
  int agent = 0;
  double epsilon = 0.0;
  double std_error = 0.0;
  int bid_grid_size = 0;
  int samples = 0;
  int type_grid_size = 0;
};

struct ExploitabilityReport {
  std::vector<AgentExploitability> agents;
  // Worst case over agents.
  double Headline() const;
};

struct ExploitabilityOptions {
  int bid_grid = 201;
  int mc_samples = 100000;
  int type_grid = 21;
  uint64_t seed = 0;
  // Seats share one strategy in a symmetric game: evaluate seat 0 and copy.
  bool symmetric = false;
};

// Per agent: mean over a midpoint type grid of the gain from the best grid
// deviation over the on-policy bid. Deviations and the on-policy bid are
// scored on the same opponent draws, and the on-policy bid is itself a
// candidate, so every per-type gain is >= 0. Korean auctions search over the
// round-0 bid and a signal-dependent round-1 bid.
ExploitabilityReport EstimateExploitability(const AuctionSpec& spec,
                                            const StrategyProfile& profile,
                                            const ExploitabilityOptions& options);

// lo + (k + 1/2) (hi - lo) / n for k = 0..n-1.
std::vector<double> MidpointGrid(double lo, double hi, int n);
// n evenly spaced points covering the fractions [from, to] of [lo, hi].
std::vector<double> InteriorGrid(double lo, double hi, int n, double from = 0.05,
                                 double to = 0.95);

struct PolicyErrorReport {
  double l2 = 0.0;    // root-mean-square residual
  double linf = 0.0;  // max absolute residual
  std::vector<double> types;
  std::vector<double> residuals;  // policy - reference
};

// Compares a bid function with a reference on `types`. Types where the
// reference has no value are skipped.
PolicyErrorReport CurveError(const std::function<double(double)>& bid,
                             const std::function<std::optional<double>(double)>& reference,
                             std::span<const double> types);

// Throws std::domain_error when the oracle has no closed form.
PolicyErrorReport PolicyError(const std::function<double(double)>& bid,
                              const OracleStrategy& oracle,
                              std::span<const double> types);

struct AuctionStatistics {
  double mean_revenue = 0.0;
  double revenue_std_error = 0.0;
  double efficiency = 0.0;  // highest type among the winners
  double tie_rate = 0.0;
};

AuctionStatistics ComputeAuctionStats(const AuctionSpec& spec,
                                      const StrategyProfile& profile,
                                      int episodes, uint64_t seed);

}  // namespace auction_rl

#endif  // AUCTION_RL_METRICS_H_
