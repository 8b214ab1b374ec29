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
#include <map>
#include <set>
#include <stdexcept>

#include "auction_rl/fictitious.h"
#include "auction_rl/nfsp.h"
#include "auction_rl/oracles.h"
#include "doctest.h"

namespace auction_rl {
namespace {

TEST_SUITE("nfsp") {

TEST_CASE("circular buffer keeps the most recent items") {
  CircularBuffer<int> buf(3);
  for (int k = 0; k < 5; ++k) buf.Add(k);
  CHECK(buf.size() == 3);
  std::multiset<int> items{buf[0], buf[1], buf[2]};
  CHECK(items == std::multiset<int>{2, 3, 4});
  Rng rng(1);
  const std::vector<const int*> sample = buf.Sample(10, rng);
  CHECK(sample.size() == 10);
  for (const int* p : sample) CHECK(*p >= 2);
  CHECK_THROWS_AS(CircularBuffer<int>(0), std::invalid_argument);
}

TEST_CASE("reservoir keeps a uniform sample of the stream") {
  // Each of 1000 stream items should survive in a 100-slot reservoir with
  // probability 0.1. Inclusion counts are pooled into 20 bins of 50 items
  // and tested with a chi-square statistic (19 dof, 0.999 quantile 43.82).
  constexpr int kStream = 1000, kCapacity = 100, kTrials = 2000, kBins = 20;
  std::vector<double> counts(kBins, 0.0);
  Rng rng(2024);
  for (int trial = 0; trial < kTrials; ++trial) {
    ReservoirBuffer<int> res(kCapacity);
    for (int k = 0; k < kStream; ++k) res.Add(k, rng);
    REQUIRE(res.size() == kCapacity);
    CHECK(res.insertions() == kStream);
    for (size_t i = 0; i < res.size(); ++i) counts[res[i] * kBins / kStream] += 1.0;
  }
  const double expected = double(kTrials) * kCapacity / kBins;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 43.82);
}

TEST_CASE("exploration schedule and action selection") {
  NfspConfig c;
  c.iterations = 101;
  CHECK(c.Epsilon(0) == doctest::Approx(0.6));
  CHECK(c.Epsilon(100) == doctest::Approx(0.01));
  CHECK(c.Epsilon(50) == doctest::Approx(0.305));

  c.hidden = {8};
  Rng rng(3);
  const NfspAgent agent(1, c, rng);
  const std::vector<double> s{0.4};
  const int greedy = agent.GreedyAction(s);
  CHECK(greedy >= 0);
  CHECK(greedy < c.num_bids);
  for (int k = 0; k < 50; ++k) CHECK(agent.Explore(greedy, 0.0, rng) == greedy);
  std::map<int, int> hits;
  for (int k = 0; k < 5100; ++k) ++hits[agent.Explore(greedy, 1.0, rng)];
  CHECK(hits.size() == static_cast<size_t>(c.num_bids));
}

TEST_CASE("config validation") {
  NfspConfig c;
  CHECK_NOTHROW(c.Validate());
  c.anticipatory = 1.5;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = NfspConfig{};
  c.num_bids = 1;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
}

TEST_CASE("pure best-response mode never fills the supervised memory") {
  NfspConfig c;
  c.iterations = 40;
  c.episodes_per_iteration = 16;
  c.anticipatory = 1.0;
  c.supervised = false;
  c.hidden = {16};
  c.q_batch_size = 32;
  const NfspResult r = NfspTrain(BenchmarkSpec(AuctionId::kFpaUniform), c, 8);
  CHECK(r.iterations_completed == 40);
  for (const NfspAgent& a : r.agents) {
    CHECK(a.sl_memory().size() == 0);
    CHECK(a.rl_memory().size() == 40 * 16);
  }
}

TEST_CASE("training is seeded and covers the korean format") {
  NfspConfig c;
  c.iterations = 20;
  c.episodes_per_iteration = 8;
  c.hidden = {8};
  c.q_batch_size = 16;
  c.sl_batch_size = 16;
  const AuctionSpec spec = BenchmarkSpec(AuctionId::kKorean);
  const NfspResult a = NfspTrain(spec, c, 4);
  const NfspResult b = NfspTrain(spec, c, 4);
  REQUIRE(a.log.size() == 20);
  for (size_t k = 0; k < a.log.size(); ++k) {
    CHECK(a.log[k].mean_reward_per_agent == b.log[k].mean_reward_per_agent);
  }
  const Mlp& qa = a.agents[1].q_net();
  const Mlp& qb = b.agents[1].q_net();
  CHECK(std::equal(qa.params().begin(), qa.params().end(), qb.params().begin()));
  // Korean episodes store two transitions per episode and seat.
  CHECK(a.agents[0].rl_memory().size() == 2 * 20 * 8);
  CHECK(a.bid_grid == LinearGrid(0.0, 1.0, c.num_bids));
}

}  // TEST_SUITE

TEST_SUITE("nfsp_slow") {

TEST_CASE("second price: average policy is an approximate equilibrium") {
  NfspConfig c;
  c.iterations = 10000;
  c.episodes_per_iteration = 128;
  c.updates_per_iteration = 2;
  c.q_lr = 3e-3;
  c.sl_lr = 3e-3;
  const AuctionSpec spec = BenchmarkSpec(AuctionId::kSpaUniform);
  const NfspResult r = NfspTrain(spec, c, 1);
  const DiscretizedGame game = Discretize(spec, 21, c.num_bids);
  Profile profile;
  for (int i = 0; i < 2; ++i) {
    EmpiricalStrategy s;
    for (double v : game.valuations(i)) {
      EpisodeState state;
      state.bidder_id = i;
      state.type = v;
      s.probs.push_back(r.agents[i].average().Probabilities(StateFeatures(spec, state)));
      s.play_counts.emplace_back(game.num_bids(), 0);
    }
    profile.push_back(std::move(s));
  }
  const std::vector<double> eps = ExactExploitability(game, profile);
  for (int i = 0; i < 2; ++i) {
    CAPTURE(i);
    CHECK(eps[i] <= 2 * game.BidStep());
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace auction_rl
