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

#include "auction_rl/ppo.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "auction_rl/random.h"

namespace auction_rl {
namespace {

struct EpisodeSteps {
  // Per seat, the steps of that seat in this episode.
  std::vector<std::vector<Step>> seats;
};

Step Act(const AuctionSpec& spec, const PolicySet& set, const EpisodeState& state,
         Rng& rng, double* bid) {
  Step step;
  step.features = StateFeatures(spec, state);
  const int index = set.Index(state.bidder_id);
  const PolicySample sample = set.policies[index].Sample(step.features, rng);
  step.raw_action = sample.raw_action;
  step.log_prob = sample.log_prob;
  step.value = set.values[index].Value(step.features);
  *bid = sample.action;
  return step;
}

EpisodeSteps PlayEpisode(const AuctionSpec& spec, const PolicySet& set, Rng& rng) {
  const int n = spec.num_bidders;
  EpisodeSteps episode;
  episode.seats.resize(n);
  const TypeProfile types = SampleTypes(spec, rng);
  std::vector<EpisodeState> states = InitialStates(spec, types);
  ActionProfile actions;
  actions.bids.resize(n);
  for (int i = 0; i < n; ++i) {
    episode.seats[i].push_back(Act(spec, set, states[i], rng, &actions.bids[i]));
  }
  Outcome outcome;
  if (spec.format == AuctionFormat::kKorean) {
    const KoreanStep first = StepKorean(spec, types, states, actions);
    for (int i = 0; i < n; ++i) {
      episode.seats[i].front().reward = 0.0;
      episode.seats[i].front().episode_end = false;
      episode.seats[i].push_back(
          Act(spec, set, first.next_states[i], rng, &actions.bids[i]));
    }
    outcome = *StepKorean(spec, types, first.next_states, actions).outcome;
  } else {
    outcome = Settle(spec, types, actions);
  }
  for (int i = 0; i < n; ++i) {
    Step& last = episode.seats[i].back();
    last.reward = outcome.rewards[i];
    last.episode_end = true;
    if (!std::isfinite(last.reward)) throw DivergenceError("non-finite reward");
  }
  return episode;
}

struct Batch {
  Eigen::MatrixXd features;
  Eigen::VectorXd raw_actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd returns;
  Eigen::VectorXd advantages;
};

Batch MakeBatch(const Trajectory& trajectory, const PpoConfig& config) {
  const std::vector<double> returns = ComputeReturns(trajectory, config.gamma);
  const std::vector<double> advantages =
      ComputeAdvantages(trajectory, returns, config.normalize_advantages);
  const size_t n = trajectory.steps.size();
  const int dim = n == 0 ? 0 : static_cast<int>(trajectory.steps[0].features.size());
  Batch batch;
  batch.features.resize(dim, n);
  batch.raw_actions.resize(n);
  batch.old_log_probs.resize(n);
  batch.returns.resize(n);
  batch.advantages.resize(n);
  for (size_t t = 0; t < n; ++t) {
    const Step& s = trajectory.steps[t];
    for (int d = 0; d < dim; ++d) batch.features(d, t) = s.features[d];
    batch.raw_actions(t) = s.raw_action;
    batch.old_log_probs(t) = s.log_prob;
    batch.returns(t) = returns[t];
    batch.advantages(t) = advantages[t];
  }
  return batch;
}

template <typename Vec>
Vec Gather(const Vec& source, std::span<const int> idx) {
  Vec out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) out(k) = source(idx[k]);
  return out;
}

Eigen::MatrixXd GatherCols(const Eigen::MatrixXd& source, std::span<const int> idx) {
  Eigen::MatrixXd out(source.rows(), idx.size());
  for (size_t k = 0; k < idx.size(); ++k) out.col(k) = source.col(idx[k]);
  return out;
}

struct Learner {
  AdamState policy_adam;
  AdamState value_adam;
};

void UpdateAgent(GaussianPolicy& policy, ValueNet& value, Learner& learner,
                 const Batch& batch, const PpoConfig& config, bool clipped, int iteration,
                 Rng& rng) {
  const int n = static_cast<int>(batch.raw_actions.size());
  if (n == 0) return;
  const double lr_scale = config.LearningRateScale(iteration);
  learner.policy_adam.learning_rate = config.policy_lr * lr_scale;
  learner.value_adam.learning_rate = config.value_lr * lr_scale;
  const double beta = config.EntropyCoefficient(iteration);
  const int epochs = clipped ? config.epochs : 1;
  const int minibatch = clipped ? std::min(config.minibatch_size, n) : n;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> policy_grad(policy.num_params());
  std::vector<double> value_grad(value.num_params());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    if (clipped) std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += minibatch) {
      const int end = std::min(n, start + minibatch);
      const std::span<const int> idx(order.data() + start, end - start);
      const Eigen::MatrixXd x = GatherCols(batch.features, idx);

      std::fill(policy_grad.begin(), policy_grad.end(), 0.0);
      const double objective = SurrogateGradient(
          policy, x, Gather(batch.raw_actions, idx), Gather(batch.old_log_probs, idx),
          Gather(batch.advantages, idx),
          clipped ? std::optional<double>(config.clip) : std::nullopt, beta, policy_grad);
      if (!std::isfinite(objective)) throw DivergenceError("non-finite policy objective");
      std::vector<double> params = policy.Params();
      AdamStep(params, policy_grad, learner.policy_adam, StepDirection::kAscent);
      policy.SetParams(params);

      std::fill(value_grad.begin(), value_grad.end(), 0.0);
      const double loss = value.LossAndGrad(x, Gather(batch.returns, idx), value_grad);
      if (!std::isfinite(loss)) throw DivergenceError("non-finite value loss");
      AdamStep(value.net().params(), value_grad, learner.value_adam, StepDirection::kDescent);
    }
  }
}

TrainResult RunTraining(const AuctionSpec& spec, const PpoConfig& config, uint64_t seed,
                        const TrainHooks& hooks, bool clipped) {
  spec.Validate();
  config.Validate();
  if (config.mode == SelfPlayMode::kSharedPolicy && spec.valuation.kind ==
                                                        ValuationKind::kPrivateUniform) {
    for (const auto& b : spec.valuation.bounds) {
      if (b != spec.valuation.bounds.front()) {
        throw std::invalid_argument("shared policies need symmetric bidders");
      }
    }
  }
  TrainResult result;
  result.policies = InitialPolicies(spec, config, seed);
  PolicySet& set = result.policies;
  std::vector<Learner> learners;
  for (size_t p = 0; p < set.policies.size(); ++p) {
    learners.push_back({AdamState(set.policies[p].num_params(), config.policy_lr),
                        AdamState(set.values[p].num_params(), config.value_lr)});
  }
  const auto start = std::chrono::steady_clock::now();
  for (int k = 0; k < config.iterations; ++k) {
    IterationLog row;
    row.iteration = k;
    try {
      const std::vector<Trajectory> trajectories =
          CollectEpisodes(spec, set, config.episodes_per_iteration,
                          DeriveSeed(seed, {1, static_cast<uint64_t>(k)}), config.workers);
      double reward = 0.0;
      size_t episodes = 0;
      for (const Trajectory& t : trajectories) {
        for (const Step& s : t.steps) {
          reward += s.reward;
          if (s.episode_end) ++episodes;
        }
      }
      row.mean_reward_per_agent = episodes ? reward / static_cast<double>(episodes) : 0.0;
      Rng rng(DeriveSeed(seed, {2, static_cast<uint64_t>(k)}));
      for (size_t p = 0; p < set.policies.size(); ++p) {
        UpdateAgent(set.policies[p], set.values[p], learners[p],
                    MakeBatch(trajectories[p], config), config, clipped, k, rng);
      }
    } catch (const DivergenceError& e) {
      result.divergence = "iteration " + std::to_string(k) + ": " + e.what();
      return result;
    }
    double std_sum = 0.0;
    for (const GaussianPolicy& p : set.policies) std_sum += p.std_dev();
    row.policy_std = std_sum / static_cast<double>(set.policies.size());
    if (hooks.oracle_error) {
      if (const auto d = hooks.oracle_error(set)) {
        row.oracle_l2 = d->l2;
        row.oracle_linf = d->linf;
      }
    }
    const bool last = k + 1 == config.iterations;
    if (hooks.exploitability && hooks.exploitability_every > 0 &&
        ((k + 1) % hooks.exploitability_every == 0 || last)) {
      row.exploitability = hooks.exploitability(set, k);
    }
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(row);
    result.iterations_completed = k + 1;
    if (hooks.on_iteration) hooks.on_iteration(row);
  }
  return result;
}

}  // namespace

std::string SelfPlayModeName(SelfPlayMode mode) {
  return mode == SelfPlayMode::kSharedPolicy ? "shared" : "independent";
}

SelfPlayMode ParseSelfPlayMode(const std::string& name) {
  if (name == "shared") return SelfPlayMode::kSharedPolicy;
  if (name == "independent") return SelfPlayMode::kIndependentPolicies;
  throw std::invalid_argument("unknown self-play mode: " + name);
}

void PpoConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("ppo: ") + what);
  };
  require(clip > 0.0 && clip < 1.0, "clip must lie in (0, 1)");
  require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  require(policy_lr > 0.0 && value_lr > 0.0, "learning rates must be positive");
  require(entropy_start >= 0.0 && entropy_end >= 0.0, "entropy coefficients must be >= 0");
  require(iterations >= 0, "iterations must be >= 0");
  require(episodes_per_iteration >= 1, "episodes_per_iteration must be >= 1");
  require(minibatch_size >= 1, "minibatch_size must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(!hidden.empty(), "at least one hidden layer");
  require(workers >= 1, "workers must be >= 1");
}

double PpoConfig::EntropyCoefficient(int iteration) const {
  if (iterations <= 1) return entropy_start;
  const double f = static_cast<double>(iteration) / (iterations - 1);
  return entropy_start + (entropy_end - entropy_start) * f;
}

double PpoConfig::LearningRateScale(int iteration) const {
  if (!anneal_lr || iterations <= 0) return 1.0;
  return 1.0 - static_cast<double>(iteration) / iterations;
}

std::vector<double> ComputeReturns(const Trajectory& trajectory, double gamma) {
  const size_t n = trajectory.steps.size();
  std::vector<double> returns(n);
  double running = 0.0;
  for (size_t t = n; t-- > 0;) {
    if (trajectory.steps[t].episode_end) running = 0.0;
    running = trajectory.steps[t].reward + gamma * running;
    returns[t] = running;
  }
  return returns;
}

std::vector<double> ComputeAdvantages(const Trajectory& trajectory,
                                      std::span<const double> returns, bool normalize) {
  if (returns.size() != trajectory.steps.size()) {
    throw std::invalid_argument("ComputeAdvantages: size mismatch");
  }
  std::vector<double> adv(returns.size());
  for (size_t t = 0; t < adv.size(); ++t) adv[t] = returns[t] - trajectory.steps[t].value;
  if (!normalize || adv.size() < 2) return adv;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 1e-12)) return adv;
  for (double& a : adv) a = (a - mean) / sd;
  return adv;
}

double ClippedSurrogate(double log_prob_new, double log_prob_old, double advantage,
                        double clip) {
  const double r = std::exp(log_prob_new - log_prob_old);
  return std::min(r * advantage, std::clamp(r, 1.0 - clip, 1.0 + clip) * advantage);
}

double ValueLoss(std::span<const double> values, std::span<const double> returns) {
  if (values.size() != returns.size() || values.empty()) {
    throw std::invalid_argument("ValueLoss: size mismatch");
  }
  double sum = 0.0;
  for (size_t t = 0; t < values.size(); ++t) {
    sum += (values[t] - returns[t]) * (values[t] - returns[t]);
  }
  return sum / static_cast<double>(values.size());
}

double SurrogateGradient(const GaussianPolicy& policy, const Eigen::MatrixXd& features,
                         const Eigen::VectorXd& raw_actions,
                         const Eigen::VectorXd& old_log_probs,
                         const Eigen::VectorXd& advantages, std::optional<double> clip,
                         double entropy_coefficient, std::span<double> grad) {
  const Eigen::Index n = raw_actions.size();
  Mlp::Cache cache;
  Eigen::VectorXd means;
  const Eigen::VectorXd log_probs = policy.LogProbs(features, raw_actions, &cache, &means);
  Eigen::VectorXd weights(n);
  double objective = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double r = std::exp(log_probs(t) - old_log_probs(t));
    const double a = advantages(t);
    if (clip) {
      objective += ClippedSurrogate(log_probs(t), old_log_probs(t), a, *clip);
      // The unclipped branch is the minimizer unless the ratio has left the
      // trust region in the direction the advantage rewards.
      const bool active = a >= 0.0 ? r <= 1.0 + *clip : r >= 1.0 - *clip;
      weights(t) = active ? r * a / static_cast<double>(n) : 0.0;
    } else {
      objective += r * a;
      weights(t) = r * a / static_cast<double>(n);
    }
  }
  objective = objective / static_cast<double>(n) + entropy_coefficient * policy.Entropy();
  policy.AccumulateGrad(cache, means, raw_actions, weights, entropy_coefficient, grad);
  return objective;
}

PolicySet InitialPolicies(const AuctionSpec& spec, const PpoConfig& config, uint64_t seed) {
  PolicySet set;
  set.mode = config.mode;
  const int count = config.mode == SelfPlayMode::kSharedPolicy ? 1 : spec.num_bidders;
  for (int p = 0; p < count; ++p) {
    Rng rng(DeriveSeed(seed, {0, static_cast<uint64_t>(p)}));
    set.policies.emplace_back(spec.FeatureSize(), config.hidden, spec.bid_cap,
                              config.init_log_std, rng);
    set.values.emplace_back(spec.FeatureSize(), config.hidden, rng);
  }
  return set;
}

StrategyProfile MeanProfile(const AuctionSpec& spec, const PolicySet& set) {
  StrategyProfile profile;
  for (int i = 0; i < spec.num_bidders; ++i) {
    const GaussianPolicy policy = set.ForSeat(i);
    profile.push_back([spec, policy](const EpisodeState& s) {
      return policy.MeanBid(StateFeatures(spec, s));
    });
  }
  return profile;
}

std::vector<Trajectory> CollectEpisodes(const AuctionSpec& spec, const PolicySet& set,
                                        int episodes, uint64_t seed, int workers) {
  std::vector<EpisodeSteps> played(episodes);
  auto run = [&](int begin, int end) {
    for (int e = begin; e < end; ++e) {
      Rng rng(DeriveSeed(seed, {static_cast<uint64_t>(e)}));
      played[e] = PlayEpisode(spec, set, rng);
    }
  };
  workers = std::clamp(workers, 1, std::max(1, episodes));
  if (workers == 1) {
    run(0, episodes);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      const int begin = episodes * w / workers;
      const int end = episodes * (w + 1) / workers;
      threads.emplace_back([&, w, begin, end] {
        try {
          run(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<Trajectory> out(set.policies.size());
  for (const EpisodeSteps& episode : played) {
    for (int i = 0; i < spec.num_bidders; ++i) {
      std::vector<Step>& dst = out[set.Index(i)].steps;
      dst.insert(dst.end(), episode.seats[i].begin(), episode.seats[i].end());
    }
  }
  return out;
}

TrainResult Train(const AuctionSpec& spec, const PpoConfig& config, uint64_t seed,
                  const TrainHooks& hooks) {
  return RunTraining(spec, config, seed, hooks, /*clipped=*/true);
}

TrainResult TrainVanillaPg(const AuctionSpec& spec, const PpoConfig& config, uint64_t seed,
                           const TrainHooks& hooks) {
  return RunTraining(spec, config, seed, hooks, /*clipped=*/false);
}

}  // namespace auction_rl
