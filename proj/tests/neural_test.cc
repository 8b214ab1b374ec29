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
#include <filesystem>
#include <numbers>

#include "auction_rl/neural.h"
#include "doctest.h"
#include "gradient_checks.h"
#include "test_util.h"

namespace auction_rl {
namespace {

// One-input network whose output is the constant `bias`.
Mlp ConstantNet(int outputs, double bias) {
  Rng rng(0);
  Mlp net({1, outputs}, rng, 1.0);
  std::vector<double> p(net.num_params(), 0.0);
  for (int k = 0; k < outputs; ++k) p[outputs + k] = bias;
  net.set_params(p);
  return net;
}

TEST_SUITE("neural") {

TEST_CASE("gaussian density at the mean") {
  const GaussianPolicy policy(ConstantNet(1, 0.0), 1.0, std::log(0.1));
  const std::vector<double> s{0.3};
  CHECK(policy.Mean(s) == doctest::Approx(0.5));
  CHECK(policy.LogProb(s, 0.5) ==
        doctest::Approx(-std::log(0.1 * std::sqrt(2 * std::numbers::pi))));
}

TEST_CASE("executed bids are clamped to the cap") {
  const GaussianPolicy policy(ConstantNet(1, 0.7), 1.0, std::log(GaussianPolicy::kMinStd));
  const std::vector<double> s{0.3};
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const PolicySample draw = policy.Sample(s, rng);
    CHECK(draw.action == 1.0);
    CHECK(draw.raw_action > 1.1);
    CHECK(draw.log_prob == doctest::Approx(policy.LogProb(s, draw.raw_action)));
  }
  CHECK(policy.MeanBid(s) == 1.0);
}

TEST_CASE("standard deviation stays within its bounds") {
  GaussianPolicy policy(ConstantNet(1, 0.0), 2.0, 5.0);
  CHECK(policy.std_dev() == doctest::Approx(2.0 * GaussianPolicy::kMaxStd));
  std::vector<double> p = policy.Params();
  p.back() = -50.0;
  policy.SetParams(p);
  CHECK(policy.std_dev() == doctest::Approx(2.0 * GaussianPolicy::kMinStd));
}

TEST_CASE("score vanishes at the mean") {
  Rng rng(3);
  const GaussianPolicy policy(1, {4}, 1.0, std::log(0.2), rng);
  const std::vector<double> s{0.4};
  std::vector<double> grad(policy.num_params(), 0.0);
  policy.LogProbAndGrad(s, policy.Mean(s), grad);
  for (size_t i = 0; i + 1 < grad.size(); ++i) CHECK(grad[i] == doctest::Approx(0.0));
  CHECK(grad.back() == doctest::Approx(-1.0));  // d/dlog_std at the mean
}

TEST_CASE("softmax probabilities and entropy") {
  const SoftmaxPolicy uniform5(ConstantNet(5, 0.3));
  for (double p : uniform5.Probabilities(std::vector<double>{0.1})) {
    CHECK(p == doctest::Approx(0.2));
  }
  const SoftmaxPolicy uniform4(ConstantNet(4, 0.0));
  CHECK(uniform4.Entropy(std::vector<double>{0.1}) == doctest::Approx(std::log(4.0)));

  Mlp sharp = ConstantNet(4, 0.0);
  std::vector<double> p(sharp.params().begin(), sharp.params().end());
  p[4] = 60.0;  // bias of the first action
  sharp.set_params(p);
  const double h = SoftmaxPolicy(sharp).Entropy(std::vector<double>{0.1});
  CHECK(h > 0.0);
  CHECK(h < 1e-20);
}

TEST_CASE("gaussian entropy") {
  CHECK(GaussianPolicy(ConstantNet(1, 0.0), 1.0, 0.0).Entropy() ==
        doctest::Approx(0.5 * std::log(2 * std::numbers::pi * std::numbers::e)));
}

TEST_CASE("softmax score sums to zero over the output biases") {
  Rng rng(4);
  const SoftmaxPolicy policy(2, {5}, 6, rng, 1.0);
  const std::vector<double> s{0.2, 0.9};
  for (int a = 0; a < 6; ++a) {
    std::vector<double> grad(policy.num_params(), 0.0);
    policy.LogProbAndGrad(s, a, grad);
    double sum = 0.0;
    for (size_t i = grad.size() - 6; i < grad.size(); ++i) sum += grad[i];
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("backprop matches central differences") {
  Rng rng(2026);
  for (int k = 0; k < 60; ++k) {
    const testing::GradientCase c = testing::RandomGradientCase(k, rng);
    CAPTURE(c.name);
    CAPTURE(k);
    CHECK(c.error <= 1e-4);
  }
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<double> x{0.3, -0.2};
    const std::vector<double> g{0.0, 0.0};
    AdamState state(2, 0.1);
    AdamStep(x, g, state, StepDirection::kDescent);
    CHECK(x == std::vector<double>{0.3, -0.2});
  }
  SUBCASE("first step moves by the learning rate") {
    std::vector<double> x{0.0, 0.0};
    const std::vector<double> g{3.0, -0.5};
    AdamState state(2, 0.01);
    AdamStep(x, g, state, StepDirection::kDescent);
    CHECK(x[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(x[1] == doctest::Approx(0.01).epsilon(1e-6));
    std::vector<double> y{0.0};
    AdamState ascent(1, 0.01);
    AdamStep(y, std::vector<double>{2.0}, ascent, StepDirection::kAscent);
    CHECK(y[0] == doctest::Approx(0.01).epsilon(1e-6));
  }
  SUBCASE("quadratic bowl") {
    const std::vector<double> target{0.7, -1.3, 2.0};
    std::vector<double> x{0.0, 0.0, 0.0}, g(3);
    AdamState state(3, 0.05);
    for (int step = 0; step < 1000; ++step) {
      for (int i = 0; i < 3; ++i) g[i] = 2 * (x[i] - target[i]);
      AdamStep(x, g, state, StepDirection::kDescent);
    }
    for (int i = 0; i < 3; ++i) CHECK(std::abs(x[i] - target[i]) < 1e-3);
  }
  SUBCASE("errors") {
    std::vector<double> x{0.0};
    AdamState state(1, 0.1);
    CHECK_THROWS_AS(AdamStep(x, std::vector<double>{NAN}, state, StepDirection::kDescent),
                    DivergenceError);
    CHECK_THROWS_AS(AdamStep(x, std::vector<double>{1.0, 2.0}, state, StepDirection::kDescent),
                    std::invalid_argument);
  }
}

TEST_CASE("checkpoints round-trip exactly") {
  Rng rng(8);
  const GaussianPolicy policy(3, {6, 5}, 2.0, -0.7, rng);
  const Mlp q({1, 4, 7}, rng, 1.0);
  Checkpoint ckpt;
  ckpt.policy_kind = "gaussian";
  ckpt.auction = "korean";
  ckpt.seed = 12345678901234ULL;
  ckpt.iteration = 17;
  ckpt.bid_grid = {0.0, 0.5, 1.0};
  ckpt.networks = {ToRecord(policy, 0), ToRecord(q, "q", 1)};
  const auto path = testing::ScratchDir("ckpt") / "c.txt";
  WriteCheckpoint(path.string(), ckpt);
  const Checkpoint back = ReadCheckpoint(path.string());
  CHECK(back.policy_kind == "gaussian");
  CHECK(back.auction == "korean");
  CHECK(back.seed == ckpt.seed);
  CHECK(back.iteration == 17);
  CHECK(back.bid_grid == ckpt.bid_grid);
  REQUIRE(back.networks.size() == 2);
  const GaussianPolicy restored = GaussianFromRecord(back.networks[0]);
  CHECK(restored.Params() == policy.Params());
  CHECK(restored.bid_scale() == 2.0);
  const Mlp q2 = MlpFromRecord(back.networks[1]);
  CHECK(std::equal(q2.params().begin(), q2.params().end(), q.params().begin()));
  CHECK(back.networks[1].role == "q");
  CHECK(back.networks[1].agent == 1);
}

TEST_CASE("orthogonal initialization") {
  Rng rng(5);
  const Mlp net({8, 8, 1}, rng, 1.0);
  // First layer: 8x8 orthogonal with gain sqrt(2), so W W^T = 2 I.
  Eigen::Map<const Eigen::MatrixXd> w(net.params().data(), 8, 8);
  const Eigen::MatrixXd wwt = w * w.transpose();
  CHECK((wwt - 2.0 * Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
}

}  // TEST_SUITE

}  // namespace
}  // namespace auction_rl
