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

#include "auction_rl/nfsp.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "auction_rl/oracles.h"

namespace auction_rl {
namespace {

Eigen::MatrixXd Columns(const std::vector<const std::vector<double>*>& rows) {
  Eigen::MatrixXd x(rows.front()->size(), rows.size());
  for (size_t c = 0; c < rows.size(); ++c) {
    for (size_t d = 0; d < rows[c]->size(); ++d) x(d, c) = (*rows[c])[d];
  }
  return x;
}

std::vector<int> MlpSizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

void NfspConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("nfsp: ") + what);
  };
  require(num_bids >= 2, "num_bids must be >= 2");
  require(iterations >= 0, "iterations must be >= 0");
  require(episodes_per_iteration >= 1, "episodes_per_iteration must be >= 1");
  require(updates_per_iteration >= 0, "updates_per_iteration must be >= 0");
  require(q_batch_size >= 1 && sl_batch_size >= 1, "batch sizes must be >= 1");
  require(q_lr > 0.0 && sl_lr > 0.0, "learning rates must be positive");
  require(anticipatory >= 0.0 && anticipatory <= 1.0, "anticipatory must lie in [0, 1]");
  require(rl_capacity >= 1 && sl_capacity >= 1, "memory capacities must be >= 1");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
              epsilon_end <= 1.0,
          "exploration rates must lie in [0, 1]");
  require(!hidden.empty(), "at least one hidden layer");
}

double NfspConfig::Epsilon(int iteration) const {
  if (iterations <= 1) return epsilon_start;
  const double f = static_cast<double>(iteration) / (iterations - 1);
  return epsilon_start + (epsilon_end - epsilon_start) * f;
}

NfspAgent::NfspAgent(int feature_size, const NfspConfig& config, Rng& init_rng)
    : q_net_(MlpSizes(feature_size, config.hidden, config.num_bids), init_rng, 1.0),
      average_(feature_size, config.hidden, config.num_bids, init_rng),
      rl_memory_(config.rl_capacity),
      sl_memory_(config.sl_capacity) {
  q_adam_ = AdamState(q_net_.num_params(), config.q_lr);
  sl_adam_ = AdamState(average_.num_params(), config.sl_lr);
}

int NfspAgent::Explore(int greedy, double epsilon, Rng& rng) const {
  if (Uniform01(rng) < epsilon) return UniformInt(rng, q_net_.output_size());
  return greedy;
}

int NfspAgent::GreedyAction(std::span<const double> features) const {
  const int actions = q_net_.output_size();
  const Eigen::VectorXd q = q_net_.Forward(features);
  if (!q.allFinite()) throw DivergenceError("non-finite Q-values");
  int best = 0;
  for (int a = 1; a < actions; ++a) {
    if (q(a) > q(best)) best = a;
  }
  return best;
}

int NfspAgent::AverageAction(std::span<const double> features, Rng& rng) const {
  return average_.Sample(features, rng);
}

double NfspAgent::TrainQ(int batch_size, Rng& rng) {
  const std::vector<const Transition*> batch = rl_memory_.Sample(batch_size, rng);
  if (batch.empty()) return 0.0;
  std::vector<const std::vector<double>*> rows;
  for (const Transition* t : batch) rows.push_back(&t->features);
  const Eigen::MatrixXd x = Columns(rows);
  Mlp::Cache cache;
  const Eigen::MatrixXd q = q_net_.Forward(x, &cache);
  const double n = static_cast<double>(batch.size());
  Eigen::MatrixXd out_grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (size_t k = 0; k < batch.size(); ++k) {
    double target = batch[k]->reward;
    if (!batch[k]->next_features.empty()) {
      target += q_net_.Forward(batch[k]->next_features).maxCoeff();
    }
    const double err = q(batch[k]->action, k) - target;
    loss += err * err / n;
    out_grad(batch[k]->action, k) = 2.0 * err / n;
  }
  if (!std::isfinite(loss)) throw DivergenceError("non-finite Q loss");
  std::vector<double> grad(q_net_.num_params(), 0.0);
  q_net_.Backward(cache, out_grad, grad);
  AdamStep(q_net_.params(), grad, q_adam_, StepDirection::kDescent);
  return loss;
}

double NfspAgent::TrainAverage(int batch_size, Rng& rng) {
  const std::vector<const SupervisedSample*> batch = sl_memory_.Sample(batch_size, rng);
  if (batch.empty()) return 0.0;
  std::vector<const std::vector<double>*> rows;
  std::vector<int> actions;
  for (const SupervisedSample* s : batch) {
    rows.push_back(&s->features);
    actions.push_back(s->action);
  }
  std::vector<double> grad(average_.num_params(), 0.0);
  const double loss = average_.CrossEntropyAndGrad(Columns(rows), actions, grad);
  if (!std::isfinite(loss)) throw DivergenceError("non-finite average-policy loss");
  AdamStep(average_.logit_net().params(), grad, sl_adam_, StepDirection::kDescent);
  return loss;
}

NfspResult NfspTrain(const AuctionSpec& spec, const NfspConfig& config, uint64_t seed,
                     const NfspHooks& hooks) {
  spec.Validate();
  config.Validate();
  const int n = spec.num_bidders;
  NfspResult result;
  result.bid_grid = LinearGrid(0.0, spec.bid_cap, config.num_bids);
  for (int i = 0; i < n; ++i) {
    Rng init(DeriveSeed(seed, {0, static_cast<uint64_t>(i)}));
    result.agents.emplace_back(spec.FeatureSize(), config, init);
  }
  const int steps = spec.format == AuctionFormat::kKorean ? 2 : 1;
  Rng rng(DeriveSeed(seed, {1}));
  const auto start = std::chrono::steady_clock::now();
  for (int k = 0; k < config.iterations; ++k) {
    IterationLog row;
    row.iteration = k;
    const double epsilon = config.Epsilon(k);
    double reward_sum = 0.0;
    try {
      for (int e = 0; e < config.episodes_per_iteration; ++e) {
        const TypeProfile types = SampleTypes(spec, rng);
        std::vector<EpisodeState> states = InitialStates(spec, types);
        std::vector<bool> best_response(n);
        for (int i = 0; i < n; ++i) best_response[i] = Uniform01(rng) < config.anticipatory;
        std::vector<std::vector<Transition>> pending(n);
        ActionProfile actions;
        actions.bids.resize(n);
        Outcome outcome;
        for (int step = 0; step < steps; ++step) {
          for (int i = 0; i < n; ++i) {
            NfspAgent& agent = result.agents[i];
            Transition t;
            t.features = StateFeatures(spec, states[i]);
            if (best_response[i]) {
              // The average policy imitates the greedy response; exploration
              // only feeds the Q-network.
              const int greedy = agent.GreedyAction(t.features);
              t.action = agent.Explore(greedy, epsilon, rng);
              if (config.supervised) agent.RememberBestResponse({t.features, greedy}, rng);
            } else {
              t.action = agent.AverageAction(t.features, rng);
            }
            actions.bids[i] = result.bid_grid[t.action];
            pending[i].push_back(std::move(t));
          }
          if (spec.format == AuctionFormat::kKorean) {
            const KoreanStep next = StepKorean(spec, types, states, actions);
            states = next.next_states;
            if (next.outcome) outcome = *next.outcome;
          } else {
            outcome = Settle(spec, types, actions);
          }
        }
        for (int i = 0; i < n; ++i) {
          for (int step = 0; step < steps; ++step) {
            Transition& t = pending[i][step];
            if (step + 1 < steps) {
              t.next_features = pending[i][step + 1].features;
            } else {
              t.reward = outcome.rewards[i];
            }
            result.agents[i].Remember(std::move(t));
          }
          reward_sum += outcome.rewards[i];
        }
      }
      for (int u = 0; u < config.updates_per_iteration; ++u) {
        for (NfspAgent& agent : result.agents) {
          agent.TrainQ(config.q_batch_size, rng);
          if (config.supervised) agent.TrainAverage(config.sl_batch_size, rng);
        }
      }
    } catch (const DivergenceError& err) {
      result.divergence = "iteration " + std::to_string(k) + ": " + err.what();
      return result;
    }
    row.mean_reward_per_agent = reward_sum / (config.episodes_per_iteration * n);
    // Spread of the seat-0 average policy over the bid grid, mean over types.
    {
      const auto [lo, hi] = spec.TypeSupport(0);
      double spread = 0.0;
      const std::vector<double> types = LinearGrid(lo, hi, 11);
      for (double v : types) {
        EpisodeState s;
        s.type = v;
        if (spec.format == AuctionFormat::kKorean) s.observation = {0.0, 0.0};
        const std::vector<double> p =
            result.agents[0].average().Probabilities(StateFeatures(spec, s));
        double mean = 0.0, sq = 0.0;
        for (size_t a = 0; a < p.size(); ++a) {
          mean += p[a] * result.bid_grid[a];
          sq += p[a] * result.bid_grid[a] * result.bid_grid[a];
        }
        spread += std::sqrt(std::max(0.0, sq - mean * mean));
      }
      row.policy_std = spread / static_cast<double>(types.size());
    }
    result.iterations_completed = k + 1;
    if (hooks.oracle_error) {
      if (const auto d = hooks.oracle_error(result)) {
        row.oracle_l2 = d->l2;
        row.oracle_linf = d->linf;
      }
    }
    const bool last = k + 1 == config.iterations;
    if (hooks.exploitability && hooks.exploitability_every > 0 &&
        ((k + 1) % hooks.exploitability_every == 0 || last)) {
      row.exploitability = hooks.exploitability(result, k);
    }
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(row);
    if (hooks.on_iteration) hooks.on_iteration(row);
  }
  return result;
}

StrategyProfile AverageMeanProfile(const AuctionSpec& spec,
                                   const std::vector<SoftmaxPolicy>& policies,
                                   const std::vector<double>& bid_grid) {
  StrategyProfile profile;
  for (int i = 0; i < spec.num_bidders; ++i) {
    const SoftmaxPolicy policy = policies[std::min<size_t>(i, policies.size() - 1)];
    profile.push_back([spec, policy, bid_grid](const EpisodeState& s) {
      const std::vector<double> p = policy.Probabilities(StateFeatures(spec, s));
      double mean = 0.0;
      for (size_t a = 0; a < p.size(); ++a) mean += p[a] * bid_grid[a];
      return mean;
    });
  }
  return profile;
}

}  // namespace auction_rl
