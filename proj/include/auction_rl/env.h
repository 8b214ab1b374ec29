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

// Auction environments. Each auction is a seeded, episodic game: types are
// drawn, every bidder submits a bid (two rounds for the Korean format) and
// the joint bid profile is settled into per-bidder rewards.

#ifndef AUCTION_RL_ENV_H_
#define AUCTION_RL_ENV_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "auction_rl/random.h"

namespace auction_rl {

enum class AuctionFormat { kFirstPrice, kSecondPrice, kThirdPrice, kAllPay, kKorean };

enum class ValuationKind {
  kPrivateUniform,        // v_i ~ UNIF(lo_i, hi_i)
  kPrivatePower,          // CDF F(v) = v^exponent on [0, 1]
  kCommonAdditiveSignal,  // x_i = k_i + t, value = mean of signals
  kCommonScaledSignal,    // value ~ UNIF(0, 1), x_i ~ UNIF(0, 2 value)
};

enum class RiskAttitude { kNeutral, kSqrtUtility };

struct ValuationModel {
  ValuationKind kind = ValuationKind::kPrivateUniform;
  // Per-bidder support, used by kPrivateUniform only.
  std::vector<std::pair<double, double>> bounds;
  double exponent = 0.5;
};

struct AuctionSpec {
  AuctionFormat format = AuctionFormat::kFirstPrice;
  int num_bidders = 2;
  ValuationModel valuation;
  double reserve_price = 0.0;
  RiskAttitude risk = RiskAttitude::kNeutral;
  int num_rounds = 1;
  double bid_cap = 1.0;

  // Throws std::invalid_argument on a violated invariant.
  void Validate() const;

  bool IsCommonValue() const {
    return valuation.kind == ValuationKind::kCommonAdditiveSignal ||
           valuation.kind == ValuationKind::kCommonScaledSignal;
  }
  // Support of bidder's private type (valuation, or signal for common values).
  std::pair<double, double> TypeSupport(int bidder) const;
  // Number of features the policy networks see.
  int FeatureSize() const { return format == AuctionFormat::kKorean ? 3 : 1; }
};

struct EpisodeState {
  int bidder_id = 0;
  double type = 0.0;  // valuation, or signal in common-value settings
  // Empty for sealed-bid auctions; {round, signal} for the Korean format.
  std::vector<double> observation;
  int round = 0;
};

// One draw of all bidders' types. common_value is set in common-value models.
struct TypeProfile {
  std::vector<EpisodeState> states;
  std::optional<double> common_value;
};

struct ActionProfile {
  std::vector<double> bids;
};

struct Outcome {
  std::vector<int> winner_ids;
  std::vector<double> prices;  // parallel to winner_ids
  std::vector<double> rewards;
  std::optional<double> realized_common_value;
};

TypeProfile SampleTypes(const AuctionSpec& spec, Rng& rng);
TypeProfile SampleTypes(const AuctionSpec& spec, uint64_t seed);

// Inverse transform for the power model: F(v) = v^exponent.
inline double PowerQuantile(double u, double exponent) {
  return std::pow(u, 1.0 / exponent);
}

// Signals x_i = noise_i + shared with realized value mean(x).
TypeProfile CommonAdditiveProfile(std::span<const double> noise, double shared);

// Draws the other bidders' types (and the common value) conditional on
// `bidder` holding `own_type`. Used for interim best responses.
TypeProfile SampleConditional(const AuctionSpec& spec, int bidder,
                              double own_type, Rng& rng);

// Settles a sealed-bid round. Throws std::invalid_argument on mismatched
// lengths or non-finite bids.
Outcome Settle(const AuctionSpec& spec, const TypeProfile& types,
               const ActionProfile& actions);

// Utility of a wealth change under the spec's risk attitude.
double ApplyRisk(const AuctionSpec& spec, double surplus);

struct KoreanStep {
  std::vector<EpisodeState> next_states;
  std::optional<Outcome> outcome;  // set after round 1 only
};

// Advances a Korean auction. Round-0 bids only determine signals: the
// strictly highest bidder observes 1, everyone else 0. Round-1 bids are
// settled as a first-price auction.
KoreanStep StepKorean(const AuctionSpec& spec, const TypeProfile& types,
                      const std::vector<EpisodeState>& states,
                      const ActionProfile& actions);

// Initial states of an episode (round 0, with Korean observation slots).
std::vector<EpisodeState> InitialStates(const AuctionSpec& spec,
                                        const TypeProfile& types);

// Network input for a state: type scaled to [0, 1] by its support, then the
// observation for multi-round formats.
std::vector<double> StateFeatures(const AuctionSpec& spec,
                                  const EpisodeState& state);

// The eleven benchmark auctions.
enum class AuctionId {
  kFpaUniform,
  kFpaPower,
  kFpaRiskAverse,
  kFpaAsymmetric,
  kFpaReserve,
  kSpaUniform,
  kAllPay,
  kThirdPrice,
  kFpaCommon,
  kSpaCommon,
  kKorean,
};

inline constexpr AuctionId kAllAuctions[] = {
    AuctionId::kFpaUniform,  AuctionId::kFpaPower,     AuctionId::kFpaRiskAverse,
    AuctionId::kFpaAsymmetric, AuctionId::kFpaReserve, AuctionId::kSpaUniform,
    AuctionId::kAllPay,      AuctionId::kThirdPrice,   AuctionId::kFpaCommon,
    AuctionId::kSpaCommon,   AuctionId::kKorean,
};

AuctionSpec BenchmarkSpec(AuctionId id);
std::string AuctionIdName(AuctionId id);
std::optional<AuctionId> ParseAuctionId(const std::string& name);

std::string FormatName(AuctionFormat format);
AuctionFormat ParseFormat(const std::string& name);
std::string ValuationKindName(ValuationKind kind);
ValuationKind ParseValuationKind(const std::string& name);
std::string RiskName(RiskAttitude risk);
RiskAttitude ParseRisk(const std::string& name);

}  // namespace auction_rl

#endif  // AUCTION_RL_ENV_H_
