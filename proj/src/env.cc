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

#include "auction_rl/env.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace auction_rl {
namespace {

void Require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument("AuctionSpec: " + message);
}

Outcome SettleAs(const AuctionSpec& spec, AuctionFormat format,
                 const TypeProfile& types, const ActionProfile& actions) {
  const int n = spec.num_bidders;
  if (static_cast<int>(actions.bids.size()) != n ||
      static_cast<int>(types.states.size()) != n) {
    throw std::invalid_argument("Settle: expected one bid and one state per bidder");
  }
  for (double b : actions.bids) {
    if (!std::isfinite(b)) throw std::invalid_argument("Settle: non-finite bid");
  }
  if (spec.IsCommonValue() && !types.common_value) {
    throw std::invalid_argument("Settle: common-value auction without a realized value");
  }

  Outcome outcome;
  outcome.rewards.assign(n, 0.0);
  outcome.realized_common_value = types.common_value;

  const std::vector<double>& bids = actions.bids;
  double top = -1.0;
  for (double b : bids) {
    if (b >= spec.reserve_price) top = std::max(top, b);
  }
  if (top >= 0.0) {
    for (int i = 0; i < n; ++i) {
      if (bids[i] >= spec.reserve_price && bids[i] == top) {
        outcome.winner_ids.push_back(i);
      }
    }
  }

  std::vector<double> sorted = bids;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const int k = static_cast<int>(outcome.winner_ids.size());
  for (int i : outcome.winner_ids) {
    double price = bids[i];
    switch (format) {
      case AuctionFormat::kSecondPrice:
        price = std::max(sorted[1], spec.reserve_price);
        break;
      case AuctionFormat::kThirdPrice:
        price = std::max(sorted[2], spec.reserve_price);
        break;
      default:
        break;
    }
    const double value =
        spec.IsCommonValue() ? *types.common_value : types.states[i].type;
    outcome.prices.push_back(price);
    outcome.rewards[i] = ApplyRisk(spec, value - price) / k;
  }
  if (format == AuctionFormat::kAllPay) {
    for (int i = 0; i < n; ++i) {
      if (std::find(outcome.winner_ids.begin(), outcome.winner_ids.end(), i) ==
          outcome.winner_ids.end()) {
        outcome.rewards[i] = ApplyRisk(spec, -bids[i]);
      }
    }
  }
  return outcome;
}

double PosteriorScaledValue(double signal, Rng& rng) {
  // Prior UNIF(0, 1), signal ~ UNIF(0, 2v): posterior density is
  // proportional to 1/v on [signal/2, 1].
  const double lo = std::clamp(signal / 2.0, 1e-12, 1.0);
  return std::pow(lo, 1.0 - Uniform01(rng));
}

}  // namespace

void AuctionSpec::Validate() const {
  Require(num_bidders >= 2, "at least two bidders");
  Require(format != AuctionFormat::kThirdPrice || num_bidders >= 3,
          "third-price auctions need at least three bidders");
  Require(format == AuctionFormat::kKorean ? num_rounds == 2 : num_rounds == 1,
          "Korean auctions have two rounds, all others one");
  Require(std::isfinite(bid_cap) && bid_cap > 0.0, "bid_cap must be positive");
  Require(reserve_price >= 0.0 && reserve_price < bid_cap,
          "reserve_price must lie in [0, bid_cap)");
  switch (valuation.kind) {
    case ValuationKind::kPrivateUniform:
      Require(static_cast<int>(valuation.bounds.size()) == num_bidders,
              "one valuation interval per bidder");
      for (const auto& [lo, hi] : valuation.bounds) {
        Require(lo >= 0.0 && lo < hi, "valuation interval must satisfy 0 <= lo < hi");
        Require(hi <= bid_cap, "valuation support must lie within [0, bid_cap]");
        if (format == AuctionFormat::kThirdPrice) {
          Require(bid_cap >= 2.0 * hi, "third-price bid_cap must be at least 2 * hi");
        }
      }
      break;
    case ValuationKind::kPrivatePower:
      Require(valuation.exponent > 0.0, "power exponent must be positive");
      Require(bid_cap >= 1.0, "valuation support must lie within [0, bid_cap]");
      if (format == AuctionFormat::kThirdPrice) {
        Require(bid_cap >= 2.0, "third-price bid_cap must be at least 2 * hi");
      }
      break;
    case ValuationKind::kCommonAdditiveSignal:
    case ValuationKind::kCommonScaledSignal:
      Require(bid_cap >= 2.0, "signal support [0, 2] must lie within [0, bid_cap]");
      break;
  }
}

std::pair<double, double> AuctionSpec::TypeSupport(int bidder) const {
  switch (valuation.kind) {
    case ValuationKind::kPrivateUniform:
      return valuation.bounds.at(bidder);
    case ValuationKind::kPrivatePower:
      return {0.0, 1.0};
    case ValuationKind::kCommonAdditiveSignal:
    case ValuationKind::kCommonScaledSignal:
      return {0.0, 2.0};
  }
  return {0.0, 1.0};
}

double ApplyRisk(const AuctionSpec& spec, double surplus) {
  if (spec.risk == RiskAttitude::kNeutral) return surplus;
  return surplus >= 0.0 ? std::sqrt(surplus) : -std::sqrt(-surplus);
}

std::vector<EpisodeState> InitialStates(const AuctionSpec& spec,
                                        const TypeProfile& types) {
  std::vector<EpisodeState> states = types.states;
  for (EpisodeState& s : states) {
    s.round = 0;
    s.observation.clear();
    if (spec.format == AuctionFormat::kKorean) s.observation = {0.0, 0.0};
  }
  return states;
}

TypeProfile CommonAdditiveProfile(std::span<const double> noise, double shared) {
  TypeProfile profile;
  double sum = 0.0;
  for (size_t i = 0; i < noise.size(); ++i) {
    EpisodeState s;
    s.bidder_id = static_cast<int>(i);
    s.type = noise[i] + shared;
    sum += s.type;
    profile.states.push_back(s);
  }
  profile.common_value = sum / static_cast<double>(noise.size());
  return profile;
}

TypeProfile SampleTypes(const AuctionSpec& spec, Rng& rng) {
  const int n = spec.num_bidders;
  TypeProfile profile;
  profile.states.resize(n);
  for (int i = 0; i < n; ++i) profile.states[i].bidder_id = i;
  switch (spec.valuation.kind) {
    case ValuationKind::kPrivateUniform:
      for (int i = 0; i < n; ++i) {
        const auto [lo, hi] = spec.valuation.bounds[i];
        profile.states[i].type = UniformIn(rng, lo, hi);
      }
      break;
    case ValuationKind::kPrivatePower:
      for (int i = 0; i < n; ++i) {
        profile.states[i].type = PowerQuantile(Uniform01(rng), spec.valuation.exponent);
      }
      break;
    case ValuationKind::kCommonAdditiveSignal: {
      const double t = Uniform01(rng);
      std::vector<double> noise(n);
      for (double& k : noise) k = Uniform01(rng);
      profile = CommonAdditiveProfile(noise, t);
      break;
    }
    case ValuationKind::kCommonScaledSignal: {
      const double v = Uniform01(rng);
      for (int i = 0; i < n; ++i) profile.states[i].type = 2.0 * v * Uniform01(rng);
      profile.common_value = v;
      break;
    }
  }
  profile.states = InitialStates(spec, profile);
  return profile;
}

TypeProfile SampleTypes(const AuctionSpec& spec, uint64_t seed) {
  Rng rng(seed);
  return SampleTypes(spec, rng);
}

TypeProfile SampleConditional(const AuctionSpec& spec, int bidder,
                              double own_type, Rng& rng) {
  const int n = spec.num_bidders;
  TypeProfile profile;
  profile.states.resize(n);
  for (int i = 0; i < n; ++i) profile.states[i].bidder_id = i;
  switch (spec.valuation.kind) {
    case ValuationKind::kPrivateUniform:
    case ValuationKind::kPrivatePower: {
      TypeProfile draw = SampleTypes(spec, rng);
      profile.states = std::move(draw.states);
      profile.states[bidder].type = own_type;
      return profile;
    }
    case ValuationKind::kCommonAdditiveSignal: {
      const double t = UniformIn(rng, std::max(0.0, own_type - 1.0),
                                 std::min(1.0, own_type));
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        profile.states[i].type = i == bidder ? own_type : Uniform01(rng) + t;
        sum += profile.states[i].type;
      }
      profile.common_value = sum / n;
      break;
    }
    case ValuationKind::kCommonScaledSignal: {
      const double v = PosteriorScaledValue(own_type, rng);
      for (int i = 0; i < n; ++i) {
        profile.states[i].type = i == bidder ? own_type : 2.0 * v * Uniform01(rng);
      }
      profile.common_value = v;
      break;
    }
  }
  profile.states = InitialStates(spec, profile);
  return profile;
}

Outcome Settle(const AuctionSpec& spec, const TypeProfile& types,
               const ActionProfile& actions) {
  if (spec.format == AuctionFormat::kKorean) {
    throw std::logic_error("Settle: Korean auctions are advanced with StepKorean");
  }
  return SettleAs(spec, spec.format, types, actions);
}

KoreanStep StepKorean(const AuctionSpec& spec, const TypeProfile& types,
                      const std::vector<EpisodeState>& states,
                      const ActionProfile& actions) {
  if (spec.format != AuctionFormat::kKorean) {
    throw std::logic_error("StepKorean: auction is not in the Korean format");
  }
  const int n = spec.num_bidders;
  if (static_cast<int>(states.size()) != n ||
      static_cast<int>(actions.bids.size()) != n) {
    throw std::invalid_argument("StepKorean: expected one state and bid per bidder");
  }
  for (double b : actions.bids) {
    if (!std::isfinite(b)) throw std::invalid_argument("StepKorean: non-finite bid");
  }
  const int round = states[0].round;
  for (const EpisodeState& s : states) {
    if (s.round != round) throw std::logic_error("StepKorean: bidders in different rounds");
  }

  KoreanStep step;
  if (round == 0) {
    const double top = *std::max_element(actions.bids.begin(), actions.bids.end());
    const int holders = static_cast<int>(
        std::count(actions.bids.begin(), actions.bids.end(), top));
    step.next_states = states;
    for (int i = 0; i < n; ++i) {
      const bool signal = holders == 1 && actions.bids[i] == top;
      step.next_states[i].round = 1;
      step.next_states[i].observation = {1.0, signal ? 1.0 : 0.0};
    }
    return step;
  }
  if (round != 1) throw std::logic_error("StepKorean: episode already finished");
  for (const EpisodeState& s : states) {
    if (s.observation.size() != 2 || s.observation[0] != 1.0) {
      throw std::logic_error("StepKorean: round 1 reached without completing round 0");
    }
  }
  step.next_states = states;
  for (EpisodeState& s : step.next_states) s.round = 2;
  step.outcome = SettleAs(spec, AuctionFormat::kFirstPrice, types, actions);
  return step;
}

std::vector<double> StateFeatures(const AuctionSpec& spec,
                                  const EpisodeState& state) {
  const auto [lo, hi] = spec.TypeSupport(state.bidder_id);
  std::vector<double> features{(state.type - lo) / (hi - lo)};
  if (spec.format == AuctionFormat::kKorean) {
    features.push_back(state.observation.size() == 2 ? state.observation[0] : 0.0);
    features.push_back(state.observation.size() == 2 ? state.observation[1] : 0.0);
  }
  return features;
}

AuctionSpec BenchmarkSpec(AuctionId id) {
  AuctionSpec spec;
  spec.valuation.kind = ValuationKind::kPrivateUniform;
  spec.valuation.bounds = {{0.0, 1.0}, {0.0, 1.0}};
  switch (id) {
    case AuctionId::kFpaUniform:
      break;
    case AuctionId::kFpaPower:
      spec.valuation.kind = ValuationKind::kPrivatePower;
      spec.valuation.bounds.clear();
      spec.valuation.exponent = 0.5;
      break;
    case AuctionId::kFpaRiskAverse:
      spec.risk = RiskAttitude::kSqrtUtility;
      break;
    case AuctionId::kFpaAsymmetric:
      spec.valuation.bounds = {{0.0, 1.33}, {0.0, 0.8}};
      spec.bid_cap = 1.33;
      break;
    case AuctionId::kFpaReserve:
      spec.reserve_price = 0.25;
      break;
    case AuctionId::kSpaUniform:
      spec.format = AuctionFormat::kSecondPrice;
      break;
    case AuctionId::kAllPay:
      spec.format = AuctionFormat::kAllPay;
      break;
    case AuctionId::kThirdPrice:
      spec.format = AuctionFormat::kThirdPrice;
      spec.num_bidders = 3;
      spec.valuation.bounds = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
      spec.bid_cap = 2.0;
      break;
    case AuctionId::kFpaCommon:
      spec.valuation.kind = ValuationKind::kCommonAdditiveSignal;
      spec.valuation.bounds.clear();
      spec.bid_cap = 2.0;
      break;
    case AuctionId::kSpaCommon:
      spec.format = AuctionFormat::kSecondPrice;
      spec.num_bidders = 3;
      spec.valuation.kind = ValuationKind::kCommonScaledSignal;
      spec.valuation.bounds.clear();
      spec.bid_cap = 2.0;
      break;
    case AuctionId::kKorean:
      spec.format = AuctionFormat::kKorean;
      spec.num_rounds = 2;
      break;
  }
  return spec;
}

namespace {

struct NamedAuction {
  AuctionId id;
  const char* name;
};

constexpr NamedAuction kAuctionNames[] = {
    {AuctionId::kFpaUniform, "fpa_uniform"},
    {AuctionId::kFpaPower, "fpa_power"},
    {AuctionId::kFpaRiskAverse, "fpa_risk_averse"},
    {AuctionId::kFpaAsymmetric, "fpa_asymmetric"},
    {AuctionId::kFpaReserve, "fpa_reserve"},
    {AuctionId::kSpaUniform, "spa_uniform"},
    {AuctionId::kAllPay, "all_pay"},
    {AuctionId::kThirdPrice, "third_price"},
    {AuctionId::kFpaCommon, "fpa_common"},
    {AuctionId::kSpaCommon, "spa_common"},
    {AuctionId::kKorean, "korean"},
};

}  // namespace

std::string AuctionIdName(AuctionId id) {
  for (const auto& entry : kAuctionNames) {
    if (entry.id == id) return entry.name;
  }
  return "unknown";
}

std::optional<AuctionId> ParseAuctionId(const std::string& name) {
  for (const auto& entry : kAuctionNames) {
    if (name == entry.name) return entry.id;
  }
  return std::nullopt;
}

std::string FormatName(AuctionFormat format) {
  switch (format) {
    case AuctionFormat::kFirstPrice: return "first_price";
    case AuctionFormat::kSecondPrice: return "second_price";
    case AuctionFormat::kThirdPrice: return "third_price";
    case AuctionFormat::kAllPay: return "all_pay";
    case AuctionFormat::kKorean: return "korean";
  }
  return "unknown";
}

AuctionFormat ParseFormat(const std::string& name) {
  for (AuctionFormat f : {AuctionFormat::kFirstPrice, AuctionFormat::kSecondPrice,
                          AuctionFormat::kThirdPrice, AuctionFormat::kAllPay,
                          AuctionFormat::kKorean}) {
    if (FormatName(f) == name) return f;
  }
  throw std::invalid_argument("unknown auction format '" + name + "'");
}

std::string ValuationKindName(ValuationKind kind) {
  switch (kind) {
    case ValuationKind::kPrivateUniform: return "private_uniform";
    case ValuationKind::kPrivatePower: return "private_power";
    case ValuationKind::kCommonAdditiveSignal: return "common_additive_signal";
    case ValuationKind::kCommonScaledSignal: return "common_scaled_signal";
  }
  return "unknown";
}

ValuationKind ParseValuationKind(const std::string& name) {
  for (ValuationKind k : {ValuationKind::kPrivateUniform, ValuationKind::kPrivatePower,
                          ValuationKind::kCommonAdditiveSignal,
                          ValuationKind::kCommonScaledSignal}) {
    if (ValuationKindName(k) == name) return k;
  }
  throw std::invalid_argument("unknown valuation model '" + name + "'");
}

std::string RiskName(RiskAttitude risk) {
  return risk == RiskAttitude::kNeutral ? "neutral" : "sqrt";
}

RiskAttitude ParseRisk(const std::string& name) {
  if (name == "neutral") return RiskAttitude::kNeutral;
  if (name == "sqrt") return RiskAttitude::kSqrtUtility;
  throw std::invalid_argument("unknown risk attitude '" + name + "'");
}

}  // namespace auction_rl
