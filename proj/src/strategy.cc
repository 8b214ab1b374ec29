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

#include "auction_rl/strategy.h"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace auction_rl {
namespace {

struct Table {
  double lo = 0.0;
  double step = 1.0;
  std::vector<double> values;

  double At(double type) const {
    const double pos = std::clamp((type - lo) / step, 0.0,
                                  static_cast<double>(values.size() - 1));
    const size_t i = std::min(static_cast<size_t>(pos), values.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
  }
};

Table BuildTable(const AuctionSpec& spec, int bidder, const BidFunction& fn,
                 int knots, int round, std::vector<double> observation) {
  const auto [lo, hi] = spec.TypeSupport(bidder);
  Table table;
  table.lo = lo;
  table.step = (hi - lo) / (knots - 1);
  table.values.resize(knots);
  EpisodeState state;
  state.bidder_id = bidder;
  state.round = round;
  state.observation = std::move(observation);
  for (int k = 0; k < knots; ++k) {
    state.type = k + 1 == knots ? hi : lo + k * table.step;
    table.values[k] = fn(state);
  }
  return table;
}

}  // namespace

BidFunction TabulateBidFunction(const AuctionSpec& spec, int bidder,
                                const BidFunction& fn, int knots) {
  if (knots < 2) throw std::invalid_argument("TabulateBidFunction: need >= 2 knots");
  if (spec.format != AuctionFormat::kKorean) {
    auto table = std::make_shared<Table>(BuildTable(spec, bidder, fn, knots, 0, {}));
    return [table](const EpisodeState& s) { return table->At(s.type); };
  }
  auto tables = std::make_shared<std::vector<Table>>();
  tables->push_back(BuildTable(spec, bidder, fn, knots, 0, {0.0, 0.0}));
  tables->push_back(BuildTable(spec, bidder, fn, knots, 1, {1.0, 0.0}));
  tables->push_back(BuildTable(spec, bidder, fn, knots, 1, {1.0, 1.0}));
  return [tables](const EpisodeState& s) {
    if (s.round == 0) return (*tables)[0].At(s.type);
    const bool signal = s.observation.size() == 2 && s.observation[1] > 0.5;
    return (*tables)[signal ? 2 : 1].At(s.type);
  };
}

}  // namespace auction_rl
