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

#ifndef AUCTION_RL_NFSP_H_
#define AUCTION_RL_NFSP_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "auction_rl/env.h"
#include "auction_rl/neural.h"
#include "auction_rl/ppo.h"
#include "auction_rl/random.h"
#include "auction_rl/strategy.h"

namespace auction_rl {

// Fixed-capacity FIFO memory; the oldest entry is overwritten when full.
template <typename T>
class CircularBuffer {
 public:
  explicit CircularBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("CircularBuffer: zero capacity");
  }

  void Add(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[next_] = std::move(item);
    }
    next_ = (next_ + 1) % capacity_;
  }

  size_t size() const { return items_.size(); }
  size_t capacity() const { return capacity_; }
  const T& operator[](size_t i) const { return items_[i]; }

  // Uniform draws with replacement.
  std::vector<const T*> Sample(size_t count, Rng& rng) const {
    std::vector<const T*> out;
    if (items_.empty()) return out;
    for (size_t k = 0; k < count; ++k) {
      out.push_back(&items_[UniformInt(rng, static_cast<int>(items_.size()))]);
    }
    return out;
  }

 private:
  size_t capacity_;
  size_t next_ = 0;
  std::vector<T> items_;
};

// Reservoir sampling (Algorithm R): after n insertions each one is retained
// with probability capacity / n.
template <typename T>
class ReservoirBuffer {
 public:
  explicit ReservoirBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReservoirBuffer: zero capacity");
  }

  void Add(T item, Rng& rng) {
    ++insertions_;
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
      return;
    }
    const uint64_t j = rng() % insertions_;
    if (j < capacity_) items_[j] = std::move(item);
  }

  size_t size() const { return items_.size(); }
  size_t capacity() const { return capacity_; }
  uint64_t insertions() const { return insertions_; }
  const T& operator[](size_t i) const { return items_[i]; }

  std::vector<const T*> Sample(size_t count, Rng& rng) const {
    std::vector<const T*> out;
    if (items_.empty()) return out;
    for (size_t k = 0; k < count; ++k) {
      out.push_back(&items_[UniformInt(rng, static_cast<int>(items_.size()))]);
    }
    return out;
  }

 private:
  size_t capacity_;
  uint64_t insertions_ = 0;
  std::vector<T> items_;
};

struct Transition {
  std::vector<double> features;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_features;  // empty at episode end
};

struct SupervisedSample {
  std::vector<double> features;
  int action = 0;
};

struct NfspConfig {
  int num_bids = 51;
  int iterations = 3000;
  int episodes_per_iteration = 64;
  int updates_per_iteration = 1;
  int q_batch_size = 256;
  int sl_batch_size = 256;
  double q_lr = 1e-3;
  double sl_lr = 1e-3;
  double anticipatory = 0.1;  // eta
  size_t rl_capacity = 200000;
  size_t sl_capacity = 100000;
  double epsilon_start = 0.6;
  double epsilon_end = 0.01;
  bool supervised = true;  // false trains the Q-networks only
  std::vector<int> hidden = {64, 64};

  void Validate() const;  // throws std::invalid_argument
  double Epsilon(int iteration) const;
};

class NfspAgent {
 public:
  NfspAgent(int feature_size, const NfspConfig& config, Rng& init_rng);

  Mlp& q_net() { return q_net_; }
  const Mlp& q_net() const { return q_net_; }
  SoftmaxPolicy& average() { return average_; }
  const SoftmaxPolicy& average() const { return average_; }
  const CircularBuffer<Transition>& rl_memory() const { return rl_memory_; }
  const ReservoirBuffer<SupervisedSample>& sl_memory() const { return sl_memory_; }

  // Argmax of the Q-network; ties go to the lowest bid.
  int GreedyAction(std::span<const double> features) const;
  // Uniform with probability epsilon, otherwise `greedy`.
  int Explore(int greedy, double epsilon, Rng& rng) const;
  int AverageAction(std::span<const double> features, Rng& rng) const;

  void Remember(Transition t) { rl_memory_.Add(std::move(t)); }
  void RememberBestResponse(SupervisedSample s, Rng& rng) { sl_memory_.Add(std::move(s), rng); }

  // One minibatch step on the squared TD error; returns the loss.
  double TrainQ(int batch_size, Rng& rng);
  // One minibatch step on the cross-entropy toward stored actions.
  double TrainAverage(int batch_size, Rng& rng);

 private:
  Mlp q_net_;
  SoftmaxPolicy average_;
  AdamState q_adam_;
  AdamState sl_adam_;
  CircularBuffer<Transition> rl_memory_;
  ReservoirBuffer<SupervisedSample> sl_memory_;
};

struct NfspResult {
  std::vector<double> bid_grid;
  std::vector<NfspAgent> agents;  // one per seat
  std::vector<IterationLog> log;
  int iterations_completed = 0;
  std::optional<std::string> divergence;
};

struct NfspHooks {
  std::function<std::optional<OracleDistance>(const NfspResult&)> oracle_error;
  std::function<double(const NfspResult&, int iteration)> exploitability;
  int exploitability_every = 50;
  std::function<void(const IterationLog&)> on_iteration;
};

NfspResult NfspTrain(const AuctionSpec& spec, const NfspConfig& config, uint64_t seed,
                     const NfspHooks& hooks = {});

// Expected bid under each seat's average policy.
StrategyProfile AverageMeanProfile(const AuctionSpec& spec,
                                   const std::vector<SoftmaxPolicy>& policies,
                                   const std::vector<double>& bid_grid);

}  // namespace auction_rl

#endif  // AUCTION_RL_NFSP_H_
