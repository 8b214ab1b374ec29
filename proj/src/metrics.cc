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

#include "auction_rl/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "auction_rl/interim.h"

namespace auction_rl {
namespace {

struct TypeGain {
  double gain = 0.0;
  double std_error = 0.0;
};

double StdError(double sum, double sum_sq, double n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
  return std::sqrt(var / n);
}

EpisodeState OwnState(const AuctionSpec& spec, int agent, double type, int round,
                      double signal) {
  EpisodeState s;
  s.bidder_id = agent;
  s.type = type;
  s.round = round;
  if (spec.format == AuctionFormat::kKorean) {
    s.observation = {static_cast<double>(round), signal};
  }
  return s;
}

TypeGain SealedBidGain(const AuctionSpec& spec, const StrategyProfile& profile,
                       const InterimEvaluator& evaluator, int agent, double type,
                       std::span<const double> grid, int samples, Rng& rng) {
  const std::vector<OpponentDraw> draws = evaluator.Draw(profile, type, samples, rng);
  const double on_bid = profile[agent](OwnState(spec, agent, type, 0, 0.0));
  const double on_value = evaluator.MeanUtility(draws, on_bid);
  double best_value = on_value;
  double best_bid = on_bid;
  const std::vector<double> values = evaluator.MeanUtilities(draws, grid);
  for (size_t j = 0; j < grid.size(); ++j) {
    if (values[j] > best_value) {
      best_value = values[j];
      best_bid = grid[j];
    }
  }
  TypeGain result{best_value - on_value, 0.0};
  if (best_bid != on_bid) {
    double sum = 0.0, sum_sq = 0.0;
    for (const OpponentDraw& d : draws) {
      const double diff = evaluator.Utility(d, best_bid) - evaluator.Utility(d, on_bid);
      sum += diff;
      sum_sq += diff * diff;
    }
    result.std_error = StdError(sum, sum_sq, static_cast<double>(draws.size()));
  }
  return result;
}

// Two-round deviation search for the two-bidder Korean auction. Round 0 only
// sorts the draws into who holds the signal; round 1 is first price, so a
// round-1 candidate's total utility over a group of draws is
// u(v - c) * (number of opposing bids it beats, ties counting one half).
class KoreanSearch {
 public:
  KoreanSearch(const AuctionSpec& spec, std::vector<double> round1_bids)
      : spec_(spec), bids1_(std::move(round1_bids)) {}

  // Weighted beat counts are kept as difference arrays: a draw with
  // opposing bid o contributes 1/2 at [lower_bound(o), upper_bound(o)) and 1
  // from upper_bound(o) on.
  void Add(std::vector<double>& diff, double opp, double sign) const {
    if (opp < spec_.reserve_price) {
      diff[0] += sign;
      return;
    }
    const size_t lb = std::lower_bound(bids1_.begin(), bids1_.end(), opp) - bids1_.begin();
    const size_t ub = std::upper_bound(bids1_.begin(), bids1_.end(), opp) - bids1_.begin();
    diff[lb] += 0.5 * sign;
    diff[ub] += 0.5 * sign;
  }

  // Utility totals per round-1 candidate from a difference array.
  std::vector<double> Totals(const std::vector<double>& diff, double value) const {
    std::vector<double> totals(bids1_.size());
    double count = 0.0;
    for (size_t j = 0; j < bids1_.size(); ++j) {
      count += diff[j];
      totals[j] = bids1_[j] >= spec_.reserve_price
                      ? ApplyRisk(spec_, value - bids1_[j]) * count
                      : 0.0;
    }
    return totals;
  }

  double Utility(double value, double bid, double opp) const {
    if (bid < spec_.reserve_price) return 0.0;
    if (opp < spec_.reserve_price || bid > opp) return ApplyRisk(spec_, value - bid);
    if (bid == opp) return ApplyRisk(spec_, value - bid) / 2.0;
    return 0.0;
  }

  const std::vector<double>& bids1() const { return bids1_; }

 private:
  AuctionSpec spec_;
  std::vector<double> bids1_;
};

size_t ArgMax(const std::vector<double>& values) {
  return std::max_element(values.begin(), values.end()) - values.begin();
}

TypeGain KoreanGain(const AuctionSpec& spec, const StrategyProfile& profile, int agent,
                    double type, std::span<const double> grid, int samples, Rng& rng) {
  const int opp = 1 - agent;
  struct Sample {
    double round0, if_no_signal, if_signal;
  };
  std::vector<Sample> draws(samples);
  for (Sample& s : draws) {
    const TypeProfile types = SampleConditional(spec, agent, type, rng);
    const double w = types.states[opp].type;
    s.round0 = profile[opp](OwnState(spec, opp, w, 0, 0.0));
    s.if_no_signal = profile[opp](OwnState(spec, opp, w, 1, 0.0));
    s.if_signal = profile[opp](OwnState(spec, opp, w, 1, 1.0));
  }
  std::sort(draws.begin(), draws.end(),
            [](const Sample& a, const Sample& b) { return a.round0 < b.round0; });

  const double on0 = profile[agent](OwnState(spec, agent, type, 0, 0.0));
  const double on1_no = profile[agent](OwnState(spec, agent, type, 1, 0.0));
  const double on1_yes = profile[agent](OwnState(spec, agent, type, 1, 1.0));

  std::vector<double> bids0(grid.begin(), grid.end());
  bids0.push_back(on0);
  std::sort(bids0.begin(), bids0.end());
  bids0.erase(std::unique(bids0.begin(), bids0.end()), bids0.end());
  std::vector<double> bids1(grid.begin(), grid.end());
  bids1.push_back(on1_no);
  bids1.push_back(on1_yes);
  std::sort(bids1.begin(), bids1.end());
  bids1.erase(std::unique(bids1.begin(), bids1.end()), bids1.end());
  const KoreanSearch search(spec, bids1);
  const size_t j_no = std::lower_bound(bids1.begin(), bids1.end(), on1_no) - bids1.begin();
  const size_t j_yes = std::lower_bound(bids1.begin(), bids1.end(), on1_yes) - bids1.begin();

  // Own signal 1 (opponent strictly below): opponent bids if_no_signal.
  // Strictly above: own signal 0, opponent bids if_signal. Ties: both 0.
  const size_t width = bids1.size() + 1;
  std::vector<double> below(width, 0.0), above(width, 0.0);
  for (const Sample& s : draws) search.Add(above, s.if_signal, 1.0);

  const double n = static_cast<double>(samples);
  double best_value = -1e300, on_value = 0.0;
  double best_b0 = on0;
  size_t best_yes = j_yes, best_no = j_no;
  size_t lower = 0, upper = 0;
  for (double b0 : bids0) {
    while (upper < draws.size() && draws[upper].round0 <= b0) {
      search.Add(above, draws[upper].if_signal, -1.0);
      ++upper;
    }
    while (lower < draws.size() && draws[lower].round0 < b0) {
      search.Add(below, draws[lower].if_no_signal, 1.0);
      ++lower;
    }
    std::vector<double> tied(width, 0.0);
    for (size_t s = lower; s < upper; ++s) search.Add(tied, draws[s].if_no_signal, 1.0);

    const std::vector<double> with_signal = search.Totals(below, type);
    std::vector<double> without_signal = search.Totals(above, type);
    const std::vector<double> tie_totals = search.Totals(tied, type);
    for (size_t j = 0; j < without_signal.size(); ++j) without_signal[j] += tie_totals[j];

    const size_t j1 = ArgMax(with_signal);
    const size_t j0 = ArgMax(without_signal);
    const double value = (with_signal[j1] + without_signal[j0]) / n;
    if (b0 == on0) on_value = (with_signal[j_yes] + without_signal[j_no]) / n;
    if (value > best_value) {
      best_value = value;
      best_b0 = b0;
      best_yes = j1;
      best_no = j0;
    }
  }

  TypeGain result{std::max(0.0, best_value - on_value), 0.0};
  if (result.gain > 0.0) {
    auto utility = [&](const Sample& s, double b0, double yes, double no) {
      if (s.round0 < b0) return search.Utility(type, yes, s.if_no_signal);
      if (s.round0 == b0) return search.Utility(type, no, s.if_no_signal);
      return search.Utility(type, no, s.if_signal);
    };
    double sum = 0.0, sum_sq = 0.0;
    for (const Sample& s : draws) {
      const double diff = utility(s, best_b0, bids1[best_yes], bids1[best_no]) -
                          utility(s, on0, on1_yes, on1_no);
      sum += diff;
      sum_sq += diff * diff;
    }
    result.std_error = StdError(sum, sum_sq, n);
  }
  return result;
}

}  // namespace

double ExploitabilityReport::Headline() const {
  double worst = 0.0;
  for (size_t i = 0; i < agents.size(); ++i) {
    worst = i == 0 ? agents[i].epsilon : std::max(worst, agents[i].epsilon);
  }
  return worst;
}

std::vector<double> MidpointGrid(double lo, double hi, int n) {
  std::vector<double> grid(n);
  for (int k = 0; k < n; ++k) grid[k] = lo + (k + 0.5) * (hi - lo) / n;
  return grid;
}

std::vector<double> InteriorGrid(double lo, double hi, int n, double from, double to) {
  std::vector<double> grid = LinearGrid(from, to, n);
  for (double& g : grid) g = lo + (hi - lo) * g;
  return grid;
}

ExploitabilityReport EstimateExploitability(const AuctionSpec& spec,
                                            const StrategyProfile& profile,
                                            const ExploitabilityOptions& options) {
  spec.Validate();
  if (static_cast<int>(profile.size()) != spec.num_bidders) {
    throw std::invalid_argument("EstimateExploitability: one strategy per seat required");
  }
  if (spec.format == AuctionFormat::kKorean && spec.num_bidders != 2) {
    throw std::invalid_argument("EstimateExploitability: Korean auctions need two bidders");
  }
  const std::vector<double> grid = LinearGrid(0.0, spec.bid_cap, options.bid_grid);
  ExploitabilityReport report;
  const int evaluated = options.symmetric ? 1 : spec.num_bidders;
  for (int agent = 0; agent < evaluated; ++agent) {
    const auto [lo, hi] = spec.TypeSupport(agent);
    const std::vector<double> types = MidpointGrid(lo, hi, options.type_grid);
    double gain_sum = 0.0, var_sum = 0.0;
    for (size_t k = 0; k < types.size(); ++k) {
      Rng rng(DeriveSeed(options.seed, {static_cast<uint64_t>(agent), k}));
      TypeGain g;
      if (spec.format == AuctionFormat::kKorean) {
        g = KoreanGain(spec, profile, agent, types[k], grid, options.mc_samples, rng);
      } else {
        const InterimEvaluator evaluator(spec, agent);
        g = SealedBidGain(spec, profile, evaluator, agent, types[k], grid,
                          options.mc_samples, rng);
      }
      gain_sum += g.gain;
      var_sum += g.std_error * g.std_error;
    }
    const double k = static_cast<double>(types.size());
    report.agents.push_back({agent, gain_sum / k, std::sqrt(var_sum) / k, options.bid_grid,
                             options.mc_samples, options.type_grid});
  }
  for (int agent = evaluated; agent < spec.num_bidders; ++agent) {
    AgentExploitability copy = report.agents[0];
    copy.agent = agent;
    report.agents.push_back(copy);
  }
  return report;
}

PolicyErrorReport CurveError(const std::function<double(double)>& bid,
                             const std::function<std::optional<double>(double)>& reference,
                             std::span<const double> types) {
  PolicyErrorReport report;
  double sum_sq = 0.0;
  for (double t : types) {
    const std::optional<double> ref = reference(t);
    if (!ref) continue;
    const double r = bid(t) - *ref;
    report.types.push_back(t);
    report.residuals.push_back(r);
    sum_sq += r * r;
    report.linf = std::max(report.linf, std::abs(r));
  }
  if (!report.residuals.empty()) {
    report.l2 = std::sqrt(sum_sq / static_cast<double>(report.residuals.size()));
  }
  return report;
}

PolicyErrorReport PolicyError(const std::function<double(double)>& bid,
                              const OracleStrategy& oracle, std::span<const double> types) {
  if (!oracle.has_closed_form) {
    throw std::domain_error("PolicyError: no closed form for " +
                            AuctionIdName(oracle.auction_id));
  }
  return CurveError(
      bid, [&](double t) { return std::optional<double>(oracle.bid_fn(t)); }, types);
}

AuctionStatistics ComputeAuctionStats(const AuctionSpec& spec, const StrategyProfile& profile,
                                      int episodes, uint64_t seed) {
  spec.Validate();
  Rng rng(seed);
  double revenue = 0.0, revenue_sq = 0.0;
  int efficient = 0, ties = 0;
  ActionProfile actions;
  actions.bids.resize(spec.num_bidders);
  for (int e = 0; e < episodes; ++e) {
    const TypeProfile types = SampleTypes(spec, rng);
    std::vector<EpisodeState> states = InitialStates(spec, types);
    for (int i = 0; i < spec.num_bidders; ++i) actions.bids[i] = profile[i](states[i]);
    Outcome outcome;
    if (spec.format == AuctionFormat::kKorean) {
      const KoreanStep first = StepKorean(spec, types, states, actions);
      for (int i = 0; i < spec.num_bidders; ++i) {
        actions.bids[i] = profile[i](first.next_states[i]);
      }
      outcome = *StepKorean(spec, types, first.next_states, actions).outcome;
    } else {
      outcome = Settle(spec, types, actions);
    }
    double paid = 0.0;
    if (spec.format == AuctionFormat::kAllPay) {
      paid = std::accumulate(actions.bids.begin(), actions.bids.end(), 0.0);
    } else if (!outcome.prices.empty()) {
      paid = outcome.prices[0];
    }
    revenue += paid;
    revenue_sq += paid * paid;
    if (outcome.winner_ids.size() > 1) ++ties;
    int top = 0;
    for (int i = 1; i < spec.num_bidders; ++i) {
      if (types.states[i].type > types.states[top].type) top = i;
    }
    if (std::find(outcome.winner_ids.begin(), outcome.winner_ids.end(), top) !=
        outcome.winner_ids.end()) {
      ++efficient;
    }
  }
  const double n = static_cast<double>(episodes);
  AuctionStatistics stats;
  stats.mean_revenue = revenue / n;
  stats.revenue_std_error = StdError(revenue, revenue_sq, n);
  stats.efficiency = efficient / n;
  stats.tie_rate = ties / n;
  return stats;
}

}  // namespace auction_rl
