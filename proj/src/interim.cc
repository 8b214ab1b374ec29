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

#include "auction_rl/interim.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace auction_rl {

InterimEvaluator::InterimEvaluator(const AuctionSpec& spec, int bidder)
    : spec_(spec), bidder_(bidder) {
  if (spec.format == AuctionFormat::kKorean) {
    throw std::invalid_argument("InterimEvaluator: sealed-bid formats only");
  }
  if (bidder < 0 || bidder >= spec.num_bidders) {
    throw std::out_of_range("InterimEvaluator: bidder index");
  }
}

std::vector<OpponentDraw> InterimEvaluator::Draw(const StrategyProfile& profile,
                                                 double own_type, int samples,
                                                 Rng& rng) const {
  if (static_cast<int>(profile.size()) != spec_.num_bidders) {
    throw std::invalid_argument("InterimEvaluator: one strategy per seat required");
  }
  std::vector<OpponentDraw> draws(samples);
  for (OpponentDraw& d : draws) {
    const TypeProfile types = SampleConditional(spec_, bidder_, own_type, rng);
    for (int j = 0; j < spec_.num_bidders; ++j) {
      if (j == bidder_) continue;
      const double bid = profile[j](types.states[j]);
      if (bid > d.top) {
        d.second = d.top;
        d.top = bid;
        d.top_count = 1;
      } else if (bid == d.top) {
        d.second = bid;
        ++d.top_count;
      } else if (bid > d.second) {
        d.second = bid;
      }
    }
    d.value = types.common_value ? *types.common_value : own_type;
  }
  return draws;
}

double InterimEvaluator::Utility(const OpponentDraw& d, double bid) const {
  const double reserve = spec_.reserve_price;
  int share = 0;
  if (bid >= reserve) {
    if (d.top < reserve || bid > d.top) {
      share = 1;
    } else if (bid == d.top) {
      share = 1 + d.top_count;
    }
  }
  if (share == 0) {
    return spec_.format == AuctionFormat::kAllPay ? ApplyRisk(spec_, -bid) : 0.0;
  }
  double price = bid;
  if (spec_.format == AuctionFormat::kSecondPrice) {
    price = std::max(d.top, reserve);
  } else if (spec_.format == AuctionFormat::kThirdPrice) {
    price = std::max(d.second, reserve);
  }
  return ApplyRisk(spec_, d.value - price) / share;
}

double InterimEvaluator::MeanUtility(std::span<const OpponentDraw> draws,
                                     double bid) const {
  double sum = 0.0;
  for (const OpponentDraw& d : draws) sum += Utility(d, bid);
  return sum / static_cast<double>(draws.size());
}

std::vector<double> InterimEvaluator::MeanUtilities(std::span<const OpponentDraw> draws,
                                                    std::span<const double> bids) const {
  const size_t n = draws.size();
  const double reserve = spec_.reserve_price;
  const bool all_pay = spec_.format == AuctionFormat::kAllPay;
  const bool pays_bid = spec_.format == AuctionFormat::kFirstPrice || all_pay;
  std::vector<double> means(bids.size(), 0.0);

  if (pays_bid && spec_.risk != RiskAttitude::kNeutral) {
    constexpr size_t kBlock = 2048;
    for (size_t start = 0; start < n; start += kBlock) {
      const auto block = draws.subspan(start, std::min(kBlock, n - start));
      for (size_t j = 0; j < bids.size(); ++j) {
        double sum = means[j];
        for (const OpponentDraw& d : block) sum += Utility(d, bids[j]);
        means[j] = sum;
      }
    }
    for (double& m : means) m /= static_cast<double>(n);
    return means;
  }

  // A draw is won outright by any admissible bid above `key`.
  auto key = [&](const OpponentDraw& d) {
    return d.top < reserve ? -std::numeric_limits<double>::infinity() : d.top;
  };
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return key(draws[a]) < key(draws[b]); });
  std::vector<double> keys(n), value_sum(n + 1, 0.0), surplus_sum(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const OpponentDraw& d = draws[order[i]];
    keys[i] = key(d);
    value_sum[i + 1] = value_sum[i] + d.value;
    double surplus = 0.0;
    if (!pays_bid) {
      const double price = spec_.format == AuctionFormat::kThirdPrice ? d.second : d.top;
      surplus = ApplyRisk(spec_, d.value - std::max(price, reserve));
    }
    surplus_sum[i + 1] = surplus_sum[i] + surplus;
  }

  for (size_t j = 0; j < bids.size(); ++j) {
    const double bid = bids[j];
    const double lose = all_pay ? ApplyRisk(spec_, -bid) : 0.0;
    if (bid < reserve) {
      means[j] = lose;
      continue;
    }
    const size_t lo = std::lower_bound(keys.begin(), keys.end(), bid) - keys.begin();
    const size_t hi = std::upper_bound(keys.begin(), keys.end(), bid) - keys.begin();
    double sum = pays_bid ? value_sum[lo] - static_cast<double>(lo) * bid : surplus_sum[lo];
    for (size_t i = lo; i < hi; ++i) sum += Utility(draws[order[i]], bid);
    sum += static_cast<double>(n - hi) * lose;
    means[j] = sum / static_cast<double>(n);
  }
  return means;
}

}  // namespace auction_rl
