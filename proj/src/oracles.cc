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

#include "auction_rl/oracles.h"

#include <cmath>
#include <stdexcept>

#include "auction_rl/interim.h"

namespace auction_rl {

OracleStrategy Oracle(AuctionId id) {
  OracleStrategy oracle{id, nullptr, true};
  switch (id) {
    case AuctionId::kFpaUniform:
      oracle.bid_fn = [](double v) { return v / 2.0; };
      break;
    case AuctionId::kFpaPower:
      oracle.bid_fn = [](double v) { return v / 3.0; };
      break;
    case AuctionId::kFpaRiskAverse:
      oracle.bid_fn = [](double v) { return 2.0 * v / 3.0; };
      break;
    case AuctionId::kSpaUniform:
      oracle.bid_fn = [](double v) { return v; };
      break;
    case AuctionId::kAllPay:
      oracle.bid_fn = [](double v) { return v * v / 2.0; };
      break;
    case AuctionId::kThirdPrice:
      oracle.bid_fn = [](double v) { return 2.0 * v; };
      break;
    case AuctionId::kFpaCommon:
      oracle.bid_fn = [](double x) { return 2.0 * x / 3.0; };
      break;
    case AuctionId::kSpaCommon:
      oracle.bid_fn = [](double x) { return 2.0 * x / (2.0 + x); };
      break;
    case AuctionId::kFpaAsymmetric:
    case AuctionId::kFpaReserve:
    case AuctionId::kKorean:
      oracle.has_closed_form = false;
      break;
  }
  return oracle;
}

double OracleBid(AuctionId id, double type) {
  const OracleStrategy oracle = Oracle(id);
  if (!oracle.has_closed_form) {
    throw std::domain_error("no closed-form equilibrium for " + AuctionIdName(id));
  }
  return oracle.bid_fn(type);
}

std::optional<double> ReserveOracleBid(double v, double r) {
  if (v < r) return std::nullopt;
  return (v * v + r * r) / (2.0 * v);
}

StrategyProfile OracleProfile(AuctionId id) {
  const AuctionSpec spec = BenchmarkSpec(id);
  BidFunction fn;
  if (id == AuctionId::kFpaReserve) {
    const double r = spec.reserve_price;
    fn = [r](const EpisodeState& s) { return ReserveOracleBid(s.type, r).value_or(0.0); };
  } else {
    const OracleStrategy oracle = Oracle(id);
    if (!oracle.has_closed_form) {
      throw std::domain_error("no reference equilibrium for " + AuctionIdName(id));
    }
    fn = [bid = oracle.bid_fn](const EpisodeState& s) { return bid(s.type); };
  }
  return StrategyProfile(spec.num_bidders, fn);
}

std::optional<double> ReferenceBid(AuctionId id, double type) {
  if (id == AuctionId::kFpaReserve) {
    return ReserveOracleBid(type, BenchmarkSpec(id).reserve_price);
  }
  const OracleStrategy oracle = Oracle(id);
  if (!oracle.has_closed_form) return std::nullopt;
  return oracle.bid_fn(type);
}

GridBestResponse BestResponseGrid(const AuctionSpec& spec,
                                  const StrategyProfile& profile, int bidder,
                                  double type, std::span<const double> bid_grid,
                                  int mc_samples, uint64_t seed,
                                  double tie_tolerance_se) {
  if (bid_grid.empty()) throw std::invalid_argument("BestResponseGrid: empty bid grid");
  if (mc_samples < 1) throw std::invalid_argument("BestResponseGrid: mc_samples must be >= 1");
  for (size_t j = 1; j < bid_grid.size(); ++j) {
    if (bid_grid[j] < bid_grid[j - 1]) {
      throw std::invalid_argument("BestResponseGrid: bid grid must be sorted");
    }
  }

  const InterimEvaluator evaluator(spec, bidder);
  Rng rng(seed);
  const std::vector<OpponentDraw> draws = evaluator.Draw(profile, type, mc_samples, rng);

  const std::vector<double> means = evaluator.MeanUtilities(draws, bid_grid);
  size_t best = 0;
  for (size_t j = 0; j < bid_grid.size(); ++j) {
    if (means[j] > means[best]) best = j;
  }

  if (tie_tolerance_se > 0.0) {
    const double n = static_cast<double>(draws.size());
    for (size_t j = 0; j < best; ++j) {
      double sum = 0.0, sum_sq = 0.0;
      for (const OpponentDraw& d : draws) {
        const double diff = evaluator.Utility(d, bid_grid[j]) -
                            evaluator.Utility(d, bid_grid[best]);
        sum += diff;
        sum_sq += diff * diff;
      }
      const double mean = sum / n;
      const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
      if (mean >= -tie_tolerance_se * std::sqrt(var / n)) {
        best = j;
        break;
      }
    }
  }
  return {bid_grid[best], means[best]};
}

std::vector<double> LinearGrid(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("LinearGrid: n must be >= 1");
  if (n == 1) return {lo};
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * i / (n - 1);
  grid.back() = hi;
  return grid;
}

}  // namespace auction_rl
