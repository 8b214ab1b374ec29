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

// Small feed-forward networks with hand-written backpropagation, the policy
// parameterizations built on them, Adam, and a text checkpoint format.
//
// Batched calls take features as a (feature_size x batch) matrix, one sample
// per column.

#ifndef AUCTION_RL_NEURAL_H_
#define AUCTION_RL_NEURAL_H_

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "auction_rl/random.h"

namespace auction_rl {

// Raised when training produces a non-finite quantity.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tanh hidden layers, identity output. Parameters live in one flat vector,
// layer by layer: weights (out x in, column-major) then biases.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // [0] is the input
  };

  Mlp() = default;
  // Hidden layers get orthogonal initialization with gain sqrt(2), the output
  // layer orthogonal with `output_gain`. Biases start at zero.
  Mlp(std::vector<int> layer_sizes, Rng& rng, double output_gain);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  void set_params(std::span<const double> params);

  Eigen::MatrixXd Forward(const Eigen::MatrixXd& inputs, Cache* cache = nullptr) const;
  Eigen::VectorXd Forward(std::span<const double> input) const;

  // Adds dLoss/dParams to `grads` given dLoss/dOutputs (output_size x batch).
  void Backward(const Cache& cache, const Eigen::MatrixXd& output_grad,
                std::span<double> grads) const;

 private:
  std::vector<int> sizes_;
  std::vector<size_t> offsets_;
  std::vector<double> params_;
};

Eigen::MatrixXd FeatureMatrix(const std::vector<std::vector<double>>& rows);

struct PolicySample {
  double action = 0.0;      // executed bid, clamped to [0, bid_cap]
  double raw_action = 0.0;  // unclamped Gaussian draw
  double log_prob = 0.0;    // log-density of raw_action
};

// N(mu(s), sigma) over bids. The network works on a normalized bid scale:
// mu = bid_scale * (0.5 + net(s)), sigma = bid_scale * exp(log_std), with a
// state-independent log_std clamped so exp(log_std) is in [kMinStd, kMaxStd].
// Parameter vector: mean-net parameters followed by log_std.
class GaussianPolicy {
 public:
  static constexpr double kMinStd = 1e-3;
  static constexpr double kMaxStd = 1.0;

  GaussianPolicy() = default;
  GaussianPolicy(int feature_size, const std::vector<int>& hidden,
                 double bid_scale, double init_log_std, Rng& rng);
  GaussianPolicy(Mlp mean_net, double bid_scale, double log_std);

  const Mlp& mean_net() const { return mean_net_; }
  double bid_scale() const { return bid_scale_; }
  double log_std() const { return log_std_; }
  double std_dev() const;  // in bid units
  int feature_size() const { return mean_net_.input_size(); }

  size_t num_params() const { return mean_net_.num_params() + 1; }
  std::vector<double> Params() const;
  void SetParams(std::span<const double> params);  // clamps log_std

  double Mean(std::span<const double> features) const;
  // Mean clamped to [0, bid_scale]: the deterministic bid function.
  double MeanBid(std::span<const double> features) const;

  PolicySample Sample(std::span<const double> features, Rng& rng) const;
  double LogProb(std::span<const double> features, double raw_action) const;
  // Returns log pi(a|s); writes its gradient (size num_params()) to `grad`.
  double LogProbAndGrad(std::span<const double> features, double raw_action,
                        std::span<double> grad) const;
  double Entropy() const;

  // Batched log-probabilities; fills `cache` and `means` for the backward pass.
  Eigen::VectorXd LogProbs(const Eigen::MatrixXd& features,
                           const Eigen::VectorXd& raw_actions, Mlp::Cache* cache,
                           Eigen::VectorXd* means) const;
  // Adds the gradient of sum_t weights_t * log pi(a_t|s_t) + entropy_weight * H.
  void AccumulateGrad(const Mlp::Cache& cache, const Eigen::VectorXd& means,
                      const Eigen::VectorXd& raw_actions,
                      const Eigen::VectorXd& weights, double entropy_weight,
                      std::span<double> grad) const;

 private:
  Mlp mean_net_;
  double bid_scale_ = 1.0;
  double log_std_ = 0.0;
};

// Categorical policy over a fixed set of discrete actions.
class SoftmaxPolicy {
 public:
  SoftmaxPolicy() = default;
  SoftmaxPolicy(int feature_size, const std::vector<int>& hidden,
                int num_actions, Rng& rng, double output_gain = 0.01);
  explicit SoftmaxPolicy(Mlp logit_net);

  const Mlp& logit_net() const { return logit_net_; }
  Mlp& logit_net() { return logit_net_; }
  int num_actions() const { return logit_net_.output_size(); }
  size_t num_params() const { return logit_net_.num_params(); }

  std::vector<double> Probabilities(std::span<const double> features) const;
  Eigen::MatrixXd Probabilities(const Eigen::MatrixXd& features,
                                Mlp::Cache* cache = nullptr) const;
  int Sample(std::span<const double> features, Rng& rng,
             double* log_prob = nullptr) const;
  double LogProbAndGrad(std::span<const double> features, int action,
                        std::span<double> grad) const;
  double Entropy(std::span<const double> features) const;

  // Mean cross-entropy -log pi(a_t|s_t) over the batch; adds its gradient.
  double CrossEntropyAndGrad(const Eigen::MatrixXd& features,
                             std::span<const int> actions,
                             std::span<double> grad) const;

 private:
  Mlp logit_net_;
};

// Column-wise softmax.
Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits);

// State-value approximator V(s).
class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(int feature_size, const std::vector<int>& hidden, Rng& rng);
  explicit ValueNet(Mlp net) : net_(std::move(net)) {}

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  size_t num_params() const { return net_.num_params(); }

  double Value(std::span<const double> features) const;
  Eigen::VectorXd Values(const Eigen::MatrixXd& features) const;
  // Mean squared error against `targets`; adds its gradient to `grad`.
  double LossAndGrad(const Eigen::MatrixXd& features,
                     const Eigen::VectorXd& targets, std::span<double> grad) const;

 private:
  Mlp net_;
};

struct AdamState {
  AdamState() = default;
  AdamState(size_t num_params, double learning_rate)
      : m(num_params, 0.0), v(num_params, 0.0), learning_rate(learning_rate) {}

  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class StepDirection { kAscent, kDescent };

// Bias-corrected Adam. Throws DivergenceError on a non-finite gradient and
// std::invalid_argument on a shape mismatch.
void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state, StepDirection direction);

// Versioned text checkpoint. Parameters are written with 17 significant
// digits so they round-trip exactly.
struct NetworkRecord {
  std::string role;  // "policy", "value", "q", "average"
  int agent = 0;
  std::vector<int> layer_sizes;
  double bid_scale = 1.0;
  double log_std = 0.0;
  std::vector<double> params;
};

struct Checkpoint {
  static constexpr int kVersion = 1;
  std::string policy_kind;  // "gaussian" or "softmax"
  std::string auction;
  uint64_t seed = 0;
  int iteration = 0;
  std::vector<double> bid_grid;  // softmax policies only
  std::vector<NetworkRecord> networks;
};

void WriteCheckpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint ReadCheckpoint(const std::string& path);

NetworkRecord ToRecord(const GaussianPolicy& policy, int agent);
NetworkRecord ToRecord(const Mlp& net, const std::string& role, int agent);
GaussianPolicy GaussianFromRecord(const NetworkRecord& record);
Mlp MlpFromRecord(const NetworkRecord& record);

}  // namespace auction_rl

#endif  // AUCTION_RL_NEURAL_H_
