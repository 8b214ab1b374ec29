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

#include "auction_rl/fictitious.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "auction_rl/random.h"

namespace auction_rl {
namespace {

size_t IntPow(size_t base, int exp) {
  size_t r = 1;
  for (int e = 0; e < exp; ++e) r *= base;
  return r;
}

// Decodes a flat opponent index into per-opponent bid indices.
void DecodeOpponents(size_t index, int num_bids, std::span<int> out) {
  for (size_t k = out.size(); k-- > 0;) {
    out[k] = static_cast<int>(index % num_bids);
    index /= num_bids;
  }
}

// Joint distribution of the opponents' bids, flattened like the payoff table.
std::vector<double> OpponentBidDistribution(const DiscretizedGame& game, const Profile& profile,
                                            int player) {
  const int B = game.num_bids();
  std::vector<double> joint{1.0};
  for (int j = 0; j < game.num_players(); ++j) {
    if (j == player) continue;
    std::vector<double> marginal(B, 0.0);
    const std::vector<double>& w = game.weights(j);
    for (int v = 0; v < game.num_valuations(j); ++v) {
      for (int b = 0; b < B; ++b) marginal[b] += w[v] * profile[j].probs[v][b];
    }
    std::vector<double> next(joint.size() * B);
    for (size_t k = 0; k < joint.size(); ++k) {
      for (int b = 0; b < B; ++b) next[k * B + b] = joint[k] * marginal[b];
    }
    joint = std::move(next);
  }
  return joint;
}

std::vector<int> ArgMaxRows(const std::vector<std::vector<double>>& utilities) {
  std::vector<int> best(utilities.size());
  for (size_t v = 0; v < utilities.size(); ++v) {
    int arg = 0;
    for (size_t b = 1; b < utilities[v].size(); ++b) {
      if (utilities[v][b] > utilities[v][arg]) arg = static_cast<int>(b);
    }
    best[v] = arg;
  }
  return best;
}

double Gain(const DiscretizedGame& game, const EmpiricalStrategy& strategy, int player,
            const std::vector<std::vector<double>>& utilities) {
  double gain = 0.0;
  for (int v = 0; v < game.num_valuations(player); ++v) {
    const std::vector<double>& u = utilities[v];
    const double best = *std::max_element(u.begin(), u.end());
    double shortfall = 0.0;
    for (size_t b = 0; b < u.size(); ++b) shortfall += strategy.probs[v][b] * (best - u[b]);
    gain += game.weights(player)[v] * shortfall;
  }
  return gain;
}

double Value(const DiscretizedGame& game, const EmpiricalStrategy& strategy, int player,
             const std::vector<std::vector<double>>& utilities) {
  double value = 0.0;
  for (int v = 0; v < game.num_valuations(player); ++v) {
    double row = 0.0;
    for (size_t b = 0; b < utilities[v].size(); ++b) {
      row += strategy.probs[v][b] * utilities[v][b];
    }
    value += game.weights(player)[v] * row;
  }
  return value;
}

}  // namespace

DiscretizedGame::DiscretizedGame(const AuctionSpec& spec,
                                 std::vector<std::vector<double>> valuations,
                                 std::vector<std::vector<double>> weights,
                                 std::vector<double> bids)
    : spec_(spec),
      valuations_(std::move(valuations)),
      weights_(std::move(weights)),
      bids_(std::move(bids)) {
  spec_.Validate();
  const int n = spec_.num_bidders;
  if (spec_.IsCommonValue() || spec_.format == AuctionFormat::kKorean) {
    throw std::invalid_argument("DiscretizedGame: sealed-bid private values only");
  }
  if (n < 2 || n > 3) throw std::invalid_argument("DiscretizedGame: 2 or 3 players");
  if (static_cast<int>(valuations_.size()) != n || static_cast<int>(weights_.size()) != n) {
    throw std::invalid_argument("DiscretizedGame: one valuation grid per player");
  }
  if (bids_.empty() || !std::is_sorted(bids_.begin(), bids_.end())) {
    throw std::invalid_argument("DiscretizedGame: bid grid must be sorted and non-empty");
  }
  for (int i = 0; i < n; ++i) {
    if (valuations_[i].empty() || valuations_[i].size() != weights_[i].size() ||
        !std::is_sorted(valuations_[i].begin(), valuations_[i].end())) {
      throw std::invalid_argument("DiscretizedGame: malformed valuation grid");
    }
    const double total = std::accumulate(weights_[i].begin(), weights_[i].end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12 ||
        std::any_of(weights_[i].begin(), weights_[i].end(), [](double w) { return w < 0; })) {
      throw std::invalid_argument("DiscretizedGame: weights must form a distribution");
    }
  }

  const int B = num_bids();
  const size_t opponents = IntPow(B, n - 1);
  payoffs_.resize(n);
  TypeProfile types;
  types.states.resize(n);
  for (int i = 0; i < n; ++i) types.states[i].bidder_id = i;
  ActionProfile actions;
  actions.bids.resize(n);
  std::vector<int> opp(n - 1);
  for (int i = 0; i < n; ++i) {
    const int V = num_valuations(i);
    payoffs_[i].resize(static_cast<size_t>(V) * B * opponents);
    for (int v = 0; v < V; ++v) {
      types.states[i].type = valuations_[i][v];
      for (int b = 0; b < B; ++b) {
        actions.bids[i] = bids_[b];
        for (size_t o = 0; o < opponents; ++o) {
          DecodeOpponents(o, B, opp);
          for (int j = 0, k = 0; j < n; ++j) {
            if (j != i) actions.bids[j] = bids_[opp[k++]];
          }
          payoffs_[i][(static_cast<size_t>(v) * B + b) * opponents + o] =
              Settle(spec_, types, actions).rewards[i];
        }
      }
    }
  }
}

double DiscretizedGame::BidStep() const {
  double step = 0.0;
  for (size_t b = 1; b < bids_.size(); ++b) step = std::max(step, bids_[b] - bids_[b - 1]);
  return step;
}

size_t DiscretizedGame::OpponentIndex(std::span<const int> opponent_bids) const {
  size_t index = 0;
  for (int b : opponent_bids) index = index * num_bids() + b;
  return index;
}

double DiscretizedGame::Payoff(int player, int v, int b,
                               std::span<const int> opponent_bids) const {
  if (static_cast<int>(opponent_bids.size()) != num_players() - 1) {
    throw std::invalid_argument("Payoff: one bid per opponent");
  }
  const size_t opponents = IntPow(num_bids(), num_players() - 1);
  return payoffs_[player][(static_cast<size_t>(v) * num_bids() + b) * opponents +
                          OpponentIndex(opponent_bids)];
}

DiscretizedGame Discretize(const AuctionSpec& spec, int num_valuations, int num_bids) {
  if (num_valuations < 1 || num_bids < 2) {
    throw std::invalid_argument("Discretize: grids too small");
  }
  std::vector<std::vector<double>> valuations(spec.num_bidders);
  std::vector<std::vector<double>> weights(spec.num_bidders);
  for (int i = 0; i < spec.num_bidders; ++i) {
    for (int k = 0; k < num_valuations; ++k) {
      const double q = (k + 0.5) / num_valuations;
      double v = 0.0;
      if (spec.valuation.kind == ValuationKind::kPrivatePower) {
        v = PowerQuantile(q, spec.valuation.exponent);
      } else if (spec.valuation.kind == ValuationKind::kPrivateUniform) {
        const auto [lo, hi] = spec.valuation.bounds[i];
        v = lo + (hi - lo) * q;
      } else {
        throw std::invalid_argument("Discretize: private values only");
      }
      valuations[i].push_back(v);
      weights[i].push_back(1.0 / num_valuations);
    }
  }
  std::vector<double> bids(num_bids);
  for (int b = 0; b < num_bids; ++b) bids[b] = spec.bid_cap * b / (num_bids - 1);
  return DiscretizedGame(spec, std::move(valuations), std::move(weights), std::move(bids));
}

EmpiricalStrategy EmpiricalStrategy::Uniform(int num_valuations, int num_bids) {
  EmpiricalStrategy s;
  s.probs.assign(num_valuations, std::vector<double>(num_bids, 1.0 / num_bids));
  s.play_counts.assign(num_valuations, std::vector<int64_t>(num_bids, 0));
  return s;
}

EmpiricalStrategy EmpiricalStrategy::Pure(std::span<const int> bid_index, int num_bids) {
  EmpiricalStrategy s;
  s.probs.assign(bid_index.size(), std::vector<double>(num_bids, 0.0));
  s.play_counts.assign(bid_index.size(), std::vector<int64_t>(num_bids, 0));
  for (size_t v = 0; v < bid_index.size(); ++v) {
    s.probs[v][bid_index[v]] = 1.0;
    s.play_counts[v][bid_index[v]] = 1;
  }
  return s;
}

double EmpiricalStrategy::MeanBid(int v, std::span<const double> bids) const {
  double mean = 0.0;
  for (size_t b = 0; b < bids.size(); ++b) mean += probs[v][b] * bids[b];
  return mean;
}

std::vector<std::vector<double>> InterimUtilities(const DiscretizedGame& game,
                                                  const Profile& profile, int player) {
  if (static_cast<int>(profile.size()) != game.num_players()) {
    throw std::invalid_argument("InterimUtilities: one strategy per player");
  }
  const std::vector<double> joint = OpponentBidDistribution(game, profile, player);
  const int B = game.num_bids();
  std::vector<std::vector<double>> utilities(game.num_valuations(player),
                                             std::vector<double>(B, 0.0));
  std::vector<int> opp(game.num_players() - 1);
  for (size_t o = 0; o < joint.size(); ++o) {
    if (joint[o] == 0.0) continue;
    DecodeOpponents(o, B, opp);
    for (int v = 0; v < game.num_valuations(player); ++v) {
      for (int b = 0; b < B; ++b) {
        utilities[v][b] += joint[o] * game.Payoff(player, v, b, opp);
      }
    }
  }
  return utilities;
}

std::vector<int> ExactBestResponse(const DiscretizedGame& game, const Profile& profile,
                                   int player) {
  return ArgMaxRows(InterimUtilities(game, profile, player));
}

std::vector<double> ExactExploitability(const DiscretizedGame& game, const Profile& profile) {
  std::vector<double> eps(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    eps[i] = Gain(game, profile[i], i, InterimUtilities(game, profile, i));
  }
  return eps;
}

std::vector<double> ExpectedUtilities(const DiscretizedGame& game, const Profile& profile) {
  std::vector<double> values(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    values[i] = Value(game, profile[i], i, InterimUtilities(game, profile, i));
  }
  return values;
}

void GwfpSchedule::Validate() const {
  if (!(alpha_power > 0.0 && alpha_power <= 1.0)) {
    throw std::invalid_argument("gwfp: alpha_power must lie in (0, 1] so steps sum to infinity");
  }
  if (epsilon0 < 0.0 || epsilon_power < 0.0) {
    throw std::invalid_argument("gwfp: epsilon schedule must be nonnegative and nonincreasing");
  }
  if (perturbation0 < 0.0 || perturbation_power < 0.0) {
    throw std::invalid_argument("gwfp: perturbation schedule must be nonnegative");
  }
}

double GwfpSchedule::Alpha(int t) const {
  return alpha_power == 1.0 ? 1.0 / t : std::pow(static_cast<double>(t), -alpha_power);
}

double GwfpSchedule::Epsilon(int t) const {
  return epsilon0 == 0.0 ? 0.0 : epsilon0 * std::pow(static_cast<double>(t), -epsilon_power);
}

double GwfpSchedule::Perturbation(int t) const {
  return perturbation0 == 0.0
             ? 0.0
             : perturbation0 * std::pow(static_cast<double>(t), -perturbation_power);
}

FpTrace GwfpIterate(const DiscretizedGame& game, int iterations, const GwfpSchedule& schedule,
                    uint64_t seed, int record_every) {
  if (iterations < 1) throw std::invalid_argument("fictitious play: iterations must be >= 1");
  if (record_every < 1) throw std::invalid_argument("fictitious play: record_every >= 1");
  schedule.Validate();
  const int n = game.num_players();
  const int B = game.num_bids();
  Rng rng(seed);
  Profile profile;
  for (int i = 0; i < n; ++i) {
    profile.push_back(EmpiricalStrategy::Uniform(game.num_valuations(i), B));
  }

  FpTrace trace;
  std::vector<std::vector<std::vector<double>>> utilities(n);
  for (int i = 0; i < n; ++i) utilities[i] = InterimUtilities(game, profile, i);
  for (int t = 1; t <= iterations; ++t) {
    const double alpha = schedule.Alpha(t);
    const double eps = schedule.Epsilon(t);
    const double m = schedule.Perturbation(t);
    Profile next = profile;
    for (int i = 0; i < n; ++i) {
      const std::vector<int> best = ArgMaxRows(utilities[i]);
      for (int v = 0; v < game.num_valuations(i); ++v) {
        const std::vector<double>& u = utilities[i][v];
        // Mixing in uniform play with weight lambda costs lambda * gap.
        double lambda = 0.0;
        if (eps > 0.0) {
          const double mean_u = std::accumulate(u.begin(), u.end(), 0.0) / B;
          const double gap = u[best[v]] - mean_u;
          lambda = gap > 0.0 ? std::min(1.0, eps / gap) : 1.0;
        }
        std::vector<double>& row = next[i].probs[v];
        for (int b = 0; b < B; ++b) {
          double target = lambda / B;
          if (b == best[v]) target += 1.0 - lambda;
          if (m > 0.0) target += UniformIn(rng, -m, m);
          row[b] = (1.0 - alpha) * row[b] + alpha * target;
        }
        if (m > 0.0) {
          double total = 0.0;
          for (double& p : row) {
            p = std::max(0.0, p);
            total += p;
          }
          if (total > 0.0) {
            for (double& p : row) p /= total;
          } else {
            std::fill(row.begin(), row.end(), 1.0 / B);
          }
        }
        ++next[i].play_counts[v][best[v]];
      }
    }
    profile = std::move(next);
    std::vector<double> eps_row(n), value_row(n);
    for (int i = 0; i < n; ++i) {
      utilities[i] = InterimUtilities(game, profile, i);
      eps_row[i] = Gain(game, profile[i], i, utilities[i]);
      value_row[i] = Value(game, profile[i], i, utilities[i]);
    }
    trace.exploitability.push_back(std::move(eps_row));
    trace.values.push_back(std::move(value_row));
    if (t % record_every == 0 || t == iterations) {
      trace.iterations.push_back(t);
      trace.profiles.push_back(profile);
    }
  }
  trace.final_profile = std::move(profile);
  return trace;
}

FpTrace FpIterate(const DiscretizedGame& game, int iterations, int record_every) {
  return GwfpIterate(game, iterations, GwfpSchedule{}, /*seed=*/0, record_every);
}

void WriteStrategyCsv(const std::string& path, const DiscretizedGame& game,
                      const Profile& profile, const std::string& auction) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  nlohmann::json header;
  header["auction"] = auction;
  header["bid_grid"] = game.bids();
  for (int i = 0; i < game.num_players(); ++i) {
    header["valuation_grid"].push_back(game.valuations(i));
  }
  out << "# " << header.dump() << "\n";
  out << std::setprecision(10);
  out << "player,valuation";
  for (double b : game.bids()) out << ",b" << b;
  out << "\n";
  for (int i = 0; i < game.num_players(); ++i) {
    for (int v = 0; v < game.num_valuations(i); ++v) {
      out << i << "," << game.valuations(i)[v];
      for (double p : profile[i].probs[v]) out << "," << p;
      out << "\n";
    }
  }
}

}  // namespace auction_rl
