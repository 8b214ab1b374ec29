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

#include "auction_rl/metrics.h"
#include "doctest.h"

namespace auction_rl {
namespace {

StrategyProfile Constant(int n, double bid) {
  return StrategyProfile(n, [bid](const EpisodeState&) { return bid; });
}

TEST_SUITE("metrics") {

TEST_CASE("evaluation grids") {
  const std::vector<double> mid = MidpointGrid(0.0, 1.0, 4);
  CHECK(mid == std::vector<double>{0.125, 0.375, 0.625, 0.875});
  const std::vector<double> inner = InteriorGrid(0.0, 1.0, 21);
  REQUIRE(inner.size() == 21);
  CHECK(inner.front() == doctest::Approx(0.05));
  CHECK(inner.back() == doctest::Approx(0.95));
  CHECK(inner[10] == doctest::Approx(0.5));
  const std::vector<double> asym = InteriorGrid(0.0, 0.8, 3, 0.1, 0.9);
  CHECK(asym[0] == doctest::Approx(0.08));
  CHECK(asym[2] == doctest::Approx(0.72));
}

TEST_CASE("equilibrium profile is nearly unexploitable") {
  ExploitabilityOptions o;
  o.bid_grid = 201;
  o.mc_samples = 100000;
  o.seed = 5;
  const ExploitabilityReport fpa =
      EstimateExploitability(BenchmarkSpec(AuctionId::kFpaUniform),
                             OracleProfile(AuctionId::kFpaUniform), o);
  REQUIRE(fpa.agents.size() == 2);
  CHECK(fpa.Headline() <= 0.005);
  for (const AgentExploitability& a : fpa.agents) {
    CHECK(a.epsilon >= 0.0);
    CHECK(a.bid_grid_size == 201);
    CHECK(a.samples == 100000);
    CHECK(a.type_grid_size == 21);
  }

  const ExploitabilityReport spa =
      EstimateExploitability(BenchmarkSpec(AuctionId::kSpaUniform),
                             OracleProfile(AuctionId::kSpaUniform), o);
  // Truthful bidding is dominant; only grid and sampling error remain.
  for (const AgentExploitability& a : spa.agents) CHECK(a.epsilon <= 4.0 * a.std_error + 1e-4);
}

TEST_CASE("a bidder that always bids zero is exploitable") {
  StrategyProfile profile = OracleProfile(AuctionId::kFpaUniform);
  profile[1] = [](const EpisodeState&) { return 0.0; };
  ExploitabilityOptions o;
  o.mc_samples = 20000;
  const ExploitabilityReport r =
      EstimateExploitability(BenchmarkSpec(AuctionId::kFpaUniform), profile, o);
  // Against v/2 the best response earns v^2/2, 1/6 on average; zero earns 0.
  CHECK(r.agents[1].epsilon == doctest::Approx(1.0 / 6.0).epsilon(0.05));
  CHECK(r.agents[0].epsilon > 0.05);
  CHECK(r.Headline() == std::max(r.agents[0].epsilon, r.agents[1].epsilon));
}

TEST_CASE("symmetric evaluation copies seat zero") {
  ExploitabilityOptions o;
  o.mc_samples = 5000;
  o.symmetric = true;
  const ExploitabilityReport r =
      EstimateExploitability(BenchmarkSpec(AuctionId::kThirdPrice), Constant(3, 0.5), o);
  REQUIRE(r.agents.size() == 3);
  CHECK(r.agents[1].epsilon == r.agents[0].epsilon);
  CHECK(r.agents[2].epsilon == r.agents[0].epsilon);
}

TEST_CASE("korean exploitability is nonnegative and detects a flat bidder") {
  ExploitabilityOptions o;
  o.mc_samples = 5000;
  o.bid_grid = 51;
  const ExploitabilityReport r =
      EstimateExploitability(BenchmarkSpec(AuctionId::kKorean), Constant(2, 0.0), o);
  for (const AgentExploitability& a : r.agents) {
    CHECK(a.epsilon > 0.1);
    CHECK(a.std_error >= 0.0);
  }
}

TEST_CASE("curve error") {
  const std::vector<double> types = InteriorGrid(0.0, 1.0, 21);
  const OracleStrategy oracle = Oracle(AuctionId::kFpaUniform);
  const PolicyErrorReport exact = PolicyError(oracle.bid_fn, oracle, types);
  CHECK(exact.l2 == 0.0);
  CHECK(exact.linf == 0.0);
  const PolicyErrorReport zero = PolicyError([](double) { return 0.0; }, oracle, types);
  CHECK(zero.linf == doctest::Approx(0.475));
  CHECK(zero.types.size() == 21);
  CHECK_THROWS_AS(PolicyError(oracle.bid_fn, Oracle(AuctionId::kKorean), types),
                  std::domain_error);

  const PolicyErrorReport reserve = CurveError(
      [](double) { return 0.3; }, [](double v) { return ReserveOracleBid(v, 0.25); }, types);
  CHECK(reserve.types.size() == 16);  // types below the reserve are skipped
}

TEST_CASE("auction statistics at the equilibrium") {
  const AuctionStatistics fpa = ComputeAuctionStats(
      BenchmarkSpec(AuctionId::kFpaUniform), OracleProfile(AuctionId::kFpaUniform), 200000, 9);
  CHECK(fpa.mean_revenue == doctest::Approx(1.0 / 3.0).epsilon(0.015));
  CHECK(fpa.efficiency == doctest::Approx(1.0));
  CHECK(fpa.tie_rate == 0.0);
  const AuctionStatistics ties =
      ComputeAuctionStats(BenchmarkSpec(AuctionId::kFpaUniform), Constant(2, 0.2), 1000, 1);
  CHECK(ties.tie_rate == 1.0);
  CHECK(ties.mean_revenue == doctest::Approx(0.2));
  // All-pay revenue sums both payments: 2 E[v^2/2] = 1/3.
  const AuctionStatistics all_pay = ComputeAuctionStats(
      BenchmarkSpec(AuctionId::kAllPay), OracleProfile(AuctionId::kAllPay), 200000, 4);
  CHECK(all_pay.mean_revenue == doctest::Approx(1.0 / 3.0).epsilon(0.015));
}

}  // TEST_SUITE

}  // namespace
}  // namespace auction_rl
