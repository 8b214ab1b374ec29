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

#include <cmath>
#include <stdexcept>

#include "auction_rl/interim.h"
#include "auction_rl/oracles.h"
#include "doctest.h"

namespace auction_rl {
namespace {

TEST_SUITE("oracles") {

TEST_CASE("closed forms") {
  CHECK(OracleBid(AuctionId::kFpaUniform, 0.6) == doctest::Approx(0.3));
  CHECK(OracleBid(AuctionId::kFpaPower, 0.6) == doctest::Approx(0.2));
  CHECK(OracleBid(AuctionId::kFpaRiskAverse, 0.6) == doctest::Approx(0.4));
  CHECK(OracleBid(AuctionId::kSpaUniform, 0.6) == doctest::Approx(0.6));
  CHECK(OracleBid(AuctionId::kAllPay, 0.6) == doctest::Approx(0.18));
  CHECK(OracleBid(AuctionId::kAllPay, 0.0) == 0.0);
  CHECK(OracleBid(AuctionId::kThirdPrice, 0.5) == doctest::Approx(1.0));
  CHECK(OracleBid(AuctionId::kFpaCommon, 1.5) == doctest::Approx(1.0));
  CHECK(OracleBid(AuctionId::kSpaCommon, 1.0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("auctions without a closed form") {
  for (AuctionId id : {AuctionId::kFpaAsymmetric, AuctionId::kFpaReserve, AuctionId::kKorean}) {
    CHECK_FALSE(Oracle(id).has_closed_form);
    CHECK_THROWS_AS(OracleBid(id, 0.5), std::domain_error);
  }
  CHECK_THROWS_AS(OracleProfile(AuctionId::kKorean), std::domain_error);
  CHECK_FALSE(ReferenceBid(AuctionId::kFpaAsymmetric, 0.5).has_value());
}

TEST_CASE("reserve equilibrium") {
  const double r = 0.25;
  CHECK(*ReserveOracleBid(r, r) == doctest::Approx(r));
  CHECK_FALSE(ReserveOracleBid(0.2, r).has_value());
  CHECK(*ReserveOracleBid(1.0, r) == doctest::Approx(0.53125));
  CHECK(*ReferenceBid(AuctionId::kFpaReserve, 0.5) == doctest::Approx(0.3125));

  // The formula is a fixed point of the brute-force best response.
  const AuctionSpec spec = BenchmarkSpec(AuctionId::kFpaReserve);
  const std::vector<double> grid = LinearGrid(0.0, 1.0, 201);
  const GridBestResponse br =
      BestResponseGrid(spec, OracleProfile(AuctionId::kFpaReserve), 0, 1.0, grid, 100000, 7);
  CHECK(std::abs(br.best_bid - 0.53125) <= 0.005 + 0.02);
}

TEST_CASE("second price: truthful bid is a best response") {
  const AuctionSpec spec = BenchmarkSpec(AuctionId::kSpaUniform);
  const StrategyProfile squares{[](const EpisodeState& s) { return s.type * s.type; },
                                [](const EpisodeState& s) { return s.type * s.type; }};
  const std::vector<double> grid = LinearGrid(0.0, 1.0, 101);
  const GridBestResponse br = BestResponseGrid(spec, squares, 0, 0.7, grid, 100000, 3);
  CHECK(std::abs(br.best_bid - 0.7) <= 0.01 + 1e-12);
}

TEST_CASE("first price against the equilibrium") {
  const AuctionSpec spec = BenchmarkSpec(AuctionId::kFpaUniform);
  const StrategyProfile oracle = OracleProfile(AuctionId::kFpaUniform);
  const std::vector<double> grid = LinearGrid(0.0, 1.0, 201);
  SUBCASE("zero valuation") {
    const GridBestResponse br = BestResponseGrid(spec, oracle, 0, 0.0, grid, 1000, 1);
    CHECK(br.best_bid == 0.0);
    CHECK(br.best_value == 0.0);
  }
  SUBCASE("interior valuation") {
    const GridBestResponse br = BestResponseGrid(spec, oracle, 0, 0.8, grid, 100000, 2);
    CHECK(std::abs(br.best_bid - 0.4) <= 0.02);
    // Bidding v/2 against the equilibrium earns v^2/2.
    CHECK(br.best_value == doctest::Approx(0.32).epsilon(0.02));
  }
}

TEST_CASE("batched interim utilities match the per-bid scan") {
  for (AuctionId id : kAllAuctions) {
    if (id == AuctionId::kKorean) continue;
    CAPTURE(AuctionIdName(id));
    const AuctionSpec spec = BenchmarkSpec(id);
    const std::vector<double> grid = LinearGrid(0.0, spec.bid_cap, 41);
    // Opponents snap to the grid so that exact ties occur.
    StrategyProfile profile;
    for (int i = 0; i < spec.num_bidders; ++i) {
      profile.push_back([&, i](const EpisodeState& s) {
        const auto [lo, hi] = spec.TypeSupport(i);
        const double x = (s.type - lo) / (hi - lo);
        return grid[static_cast<size_t>(x * 0.9 * (grid.size() - 1))];
      });
    }
    const InterimEvaluator evaluator(spec, 0);
    Rng rng(5);
    const double type = 0.5 * (spec.TypeSupport(0).first + spec.TypeSupport(0).second);
    const std::vector<OpponentDraw> draws = evaluator.Draw(profile, type, 5000, rng);
    const std::vector<double> batched = evaluator.MeanUtilities(draws, grid);
    for (size_t j = 0; j < grid.size(); ++j) {
      CHECK(batched[j] == doctest::Approx(evaluator.MeanUtility(draws, grid[j])).epsilon(1e-12));
    }
  }
}

TEST_CASE("grid helpers and argument checks") {
  const std::vector<double> g = LinearGrid(0.0, 2.0, 5);
  CHECK(g == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  CHECK(LinearGrid(0.3, 0.7, 1) == std::vector<double>{0.3});
  const AuctionSpec spec = BenchmarkSpec(AuctionId::kFpaUniform);
  const StrategyProfile oracle = OracleProfile(AuctionId::kFpaUniform);
  const std::vector<double> unsorted{0.5, 0.1};
  CHECK_THROWS_AS(BestResponseGrid(spec, oracle, 0, 0.5, unsorted, 10, 0),
                  std::invalid_argument);
}

}  // TEST_SUITE

}  // namespace
}  // namespace auction_rl
