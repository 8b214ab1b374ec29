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

#include "auction_rl/neural.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace auction_rl {
namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;

using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::MatrixXd OrthogonalInit(int rows, int cols, double gain, Rng& rng) {
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd gaussian(big, small);
  for (int c = 0; c < small; ++c) {
    for (int r = 0; r < big; ++r) gaussian(r, c) = StandardNormal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  // Sign fix so the distribution is uniform over orthogonal matrices.
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int c = 0; c < small; ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  Eigen::MatrixXd w = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
  return gain * w;
}

double ClampLogStd(double log_std) {
  static const double lo = std::log(GaussianPolicy::kMinStd);
  static const double hi = std::log(GaussianPolicy::kMaxStd);
  return std::clamp(log_std, lo, hi);
}

Eigen::VectorXd ToVector(std::span<const double> values) {
  return ConstVectorMap(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, Rng& rng, double output_gain)
    : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need input and output sizes");
  size_t total = 0;
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_.assign(total, 0.0);
  const size_t layers = sizes_.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double gain = l + 1 == layers ? output_gain : std::sqrt(2.0);
    MatrixMap(params_.data() + offsets_[l], out, in) = OrthogonalInit(out, in, gain, rng);
  }
}

void Mlp::set_params(std::span<const double> params) {
  if (params.size() != params_.size()) throw std::invalid_argument("Mlp: parameter count");
  std::copy(params.begin(), params.end(), params_.begin());
}

Eigen::MatrixXd Mlp::Forward(const Eigen::MatrixXd& inputs, Cache* cache) const {
  if (inputs.rows() != input_size()) throw std::invalid_argument("Mlp: input size");
  const size_t layers = sizes_.size() - 1;
  if (cache) {
    cache->activations.resize(layers + 1);
    cache->activations[0] = inputs;
  }
  Eigen::MatrixXd x = inputs;
  for (size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    ConstMatrixMap w(params_.data() + offsets_[l], out, in);
    ConstVectorMap b(params_.data() + offsets_[l] + static_cast<size_t>(out) * in, out);
    Eigen::MatrixXd h = w * x;
    h.colwise() += b;
    if (l + 1 < layers) h = h.array().tanh().matrix();
    x = std::move(h);
    if (cache) cache->activations[l + 1] = x;
  }
  return x;
}

Eigen::VectorXd Mlp::Forward(std::span<const double> input) const {
  Eigen::MatrixXd x = ToVector(input);
  return Forward(x).col(0);
}

void Mlp::Backward(const Cache& cache, const Eigen::MatrixXd& output_grad,
                   std::span<double> grads) const {
  if (grads.size() != params_.size()) throw std::invalid_argument("Mlp: gradient size");
  const size_t layers = sizes_.size() - 1;
  Eigen::MatrixXd delta = output_grad;
  for (size_t l = layers; l-- > 0;) {
    const int in = sizes_[l], out = sizes_[l + 1];
    MatrixMap gw(grads.data() + offsets_[l], out, in);
    VectorMap gb(grads.data() + offsets_[l] + static_cast<size_t>(out) * in, out);
    gw.noalias() += delta * cache.activations[l].transpose();
    gb += delta.rowwise().sum();
    if (l > 0) {
      ConstMatrixMap w(params_.data() + offsets_[l], out, in);
      const Eigen::MatrixXd& a = cache.activations[l];
      Eigen::MatrixXd back = w.transpose() * delta;
      delta = (back.array() * (1.0 - a.array().square())).matrix();
    }
  }
}

Eigen::MatrixXd FeatureMatrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows[0].size()),
                    static_cast<Eigen::Index>(rows.size()));
  for (size_t c = 0; c < rows.size(); ++c) {
    for (size_t r = 0; r < rows[c].size(); ++r) m(r, c) = rows[c][r];
  }
  return m;
}

// ---------------------------------------------------------------------------
// GaussianPolicy

GaussianPolicy::GaussianPolicy(int feature_size, const std::vector<int>& hidden,
                               double bid_scale, double init_log_std, Rng& rng)
    : bid_scale_(bid_scale), log_std_(ClampLogStd(init_log_std)) {
  std::vector<int> sizes{feature_size};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  mean_net_ = Mlp(sizes, rng, 0.01);
}

GaussianPolicy::GaussianPolicy(Mlp mean_net, double bid_scale, double log_std)
    : mean_net_(std::move(mean_net)), bid_scale_(bid_scale), log_std_(ClampLogStd(log_std)) {}

double GaussianPolicy::std_dev() const { return bid_scale_ * std::exp(log_std_); }

std::vector<double> GaussianPolicy::Params() const {
  std::vector<double> p(mean_net_.params().begin(), mean_net_.params().end());
  p.push_back(log_std_);
  return p;
}

void GaussianPolicy::SetParams(std::span<const double> params) {
  if (params.size() != num_params()) throw std::invalid_argument("GaussianPolicy: parameter count");
  mean_net_.set_params(params.first(params.size() - 1));
  log_std_ = ClampLogStd(params.back());
}

double GaussianPolicy::Mean(std::span<const double> features) const {
  return bid_scale_ * (0.5 + mean_net_.Forward(features)(0));
}

double GaussianPolicy::MeanBid(std::span<const double> features) const {
  return std::clamp(Mean(features), 0.0, bid_scale_);
}

PolicySample GaussianPolicy::Sample(std::span<const double> features, Rng& rng) const {
  const double mu = Mean(features);
  const double z = StandardNormal(rng);
  PolicySample s;
  s.raw_action = mu + std_dev() * z;
  s.action = std::clamp(s.raw_action, 0.0, bid_scale_);
  s.log_prob = -0.5 * z * z - std::log(std_dev()) - kLogSqrtTwoPi;
  if (!std::isfinite(s.raw_action)) throw DivergenceError("GaussianPolicy: non-finite action");
  return s;
}

double GaussianPolicy::LogProb(std::span<const double> features, double raw_action) const {
  const double z = (raw_action - Mean(features)) / std_dev();
  return -0.5 * z * z - std::log(std_dev()) - kLogSqrtTwoPi;
}

double GaussianPolicy::LogProbAndGrad(std::span<const double> features, double raw_action,
                                      std::span<double> grad) const {
  Eigen::MatrixXd x = ToVector(features);
  Eigen::VectorXd a(1);
  a(0) = raw_action;
  Mlp::Cache cache;
  Eigen::VectorXd means;
  const double lp = LogProbs(x, a, &cache, &means)(0);
  std::fill(grad.begin(), grad.end(), 0.0);
  AccumulateGrad(cache, means, a, Eigen::VectorXd::Ones(1), 0.0, grad);
  return lp;
}

double GaussianPolicy::Entropy() const {
  return 0.5 + kLogSqrtTwoPi + std::log(std_dev());
}

Eigen::VectorXd GaussianPolicy::LogProbs(const Eigen::MatrixXd& features,
                                         const Eigen::VectorXd& raw_actions,
                                         Mlp::Cache* cache, Eigen::VectorXd* means) const {
  const Eigen::MatrixXd out = mean_net_.Forward(features, cache);
  Eigen::VectorXd mu = (bid_scale_ * (out.row(0).array() + 0.5)).matrix().transpose();
  const double sigma = std_dev();
  const Eigen::ArrayXd z = (raw_actions - mu).array() / sigma;
  Eigen::VectorXd lp = (-0.5 * z.square() - std::log(sigma) - kLogSqrtTwoPi).matrix();
  if (means) *means = std::move(mu);
  return lp;
}

void GaussianPolicy::AccumulateGrad(const Mlp::Cache& cache, const Eigen::VectorXd& means,
                                    const Eigen::VectorXd& raw_actions,
                                    const Eigen::VectorXd& weights, double entropy_weight,
                                    std::span<double> grad) const {
  if (grad.size() != num_params()) throw std::invalid_argument("GaussianPolicy: gradient size");
  const double sigma = std_dev();
  const Eigen::ArrayXd z = (raw_actions - means).array() / sigma;
  // d log pi / d net output = scale * (a - mu) / sigma^2 = scale * z / sigma.
  Eigen::MatrixXd out_grad = (weights.array() * z * (bid_scale_ / sigma)).matrix().transpose();
  mean_net_.Backward(cache, out_grad, grad.first(grad.size() - 1));
  // d log pi / d log_std = z^2 - 1; d H / d log_std = 1.
  grad.back() += (weights.array() * (z.square() - 1.0)).sum() + entropy_weight;
}

// ---------------------------------------------------------------------------
// SoftmaxPolicy

Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    const double top = p.col(c).maxCoeff();
    p.col(c) = (p.col(c).array() - top).exp().matrix();
    p.col(c) /= p.col(c).sum();
  }
  return p;
}

SoftmaxPolicy::SoftmaxPolicy(int feature_size, const std::vector<int>& hidden,
                             int num_actions, Rng& rng, double output_gain) {
  std::vector<int> sizes{feature_size};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(num_actions);
  logit_net_ = Mlp(sizes, rng, output_gain);
}

SoftmaxPolicy::SoftmaxPolicy(Mlp logit_net) : logit_net_(std::move(logit_net)) {}

std::vector<double> SoftmaxPolicy::Probabilities(std::span<const double> features) const {
  Eigen::MatrixXd logits = logit_net_.Forward(features);
  const Eigen::MatrixXd p = Softmax(logits);
  return std::vector<double>(p.data(), p.data() + p.size());
}

Eigen::MatrixXd SoftmaxPolicy::Probabilities(const Eigen::MatrixXd& features,
                                             Mlp::Cache* cache) const {
  return Softmax(logit_net_.Forward(features, cache));
}

int SoftmaxPolicy::Sample(std::span<const double> features, Rng& rng, double* log_prob) const {
  const std::vector<double> p = Probabilities(features);
  const double u = Uniform01(rng);
  double acc = 0.0;
  int action = static_cast<int>(p.size()) - 1;
  for (size_t a = 0; a < p.size(); ++a) {
    acc += p[a];
    if (u < acc) {
      action = static_cast<int>(a);
      break;
    }
  }
  if (log_prob) *log_prob = std::log(p[action]);
  return action;
}

double SoftmaxPolicy::LogProbAndGrad(std::span<const double> features, int action,
                                     std::span<double> grad) const {
  Eigen::MatrixXd x = ToVector(features);
  Mlp::Cache cache;
  const Eigen::MatrixXd p = Probabilities(x, &cache);
  Eigen::MatrixXd out_grad = -p;
  out_grad(action, 0) += 1.0;
  std::fill(grad.begin(), grad.end(), 0.0);
  logit_net_.Backward(cache, out_grad, grad);
  return std::log(p(action, 0));
}

double SoftmaxPolicy::Entropy(std::span<const double> features) const {
  double h = 0.0;
  for (double q : Probabilities(features)) {
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

double SoftmaxPolicy::CrossEntropyAndGrad(const Eigen::MatrixXd& features,
                                          std::span<const int> actions,
                                          std::span<double> grad) const {
  Mlp::Cache cache;
  const Eigen::MatrixXd p = Probabilities(features, &cache);
  const double n = static_cast<double>(actions.size());
  Eigen::MatrixXd out_grad = p / n;
  double loss = 0.0;
  for (size_t t = 0; t < actions.size(); ++t) {
    loss -= std::log(std::max(p(actions[t], t), std::numeric_limits<double>::min()));
    out_grad(actions[t], t) -= 1.0 / n;
  }
  logit_net_.Backward(cache, out_grad, grad);
  return loss / n;
}

// ---------------------------------------------------------------------------
// ValueNet

ValueNet::ValueNet(int feature_size, const std::vector<int>& hidden, Rng& rng) {
  std::vector<int> sizes{feature_size};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  net_ = Mlp(sizes, rng, 1.0);
}

double ValueNet::Value(std::span<const double> features) const {
  return net_.Forward(features)(0);
}

Eigen::VectorXd ValueNet::Values(const Eigen::MatrixXd& features) const {
  return net_.Forward(features).row(0).transpose();
}

double ValueNet::LossAndGrad(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                             std::span<double> grad) const {
  Mlp::Cache cache;
  const Eigen::VectorXd v = net_.Forward(features, &cache).row(0).transpose();
  const Eigen::VectorXd err = v - targets;
  const double n = static_cast<double>(targets.size());
  Eigen::MatrixXd out_grad = (2.0 / n) * err.transpose();
  net_.Backward(cache, out_grad, grad);
  return err.squaredNorm() / n;
}

// ---------------------------------------------------------------------------
// Adam

void AdamStep(std::span<double> params, std::span<const double> grads, AdamState& state,
              StepDirection direction) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw std::invalid_argument("AdamStep: shape mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) throw DivergenceError("AdamStep: non-finite gradient");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double sign = direction == StepDirection::kAscent ? 1.0 : -1.0;
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] += sign * state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

template <typename T>
T ReadField(std::istream& in, const std::string& key) {
  std::string name;
  T value{};
  if (!(in >> name) || name != key || !(in >> value)) {
    throw std::runtime_error("checkpoint: expected field '" + key + "'");
  }
  return value;
}

}  // namespace

void WriteCheckpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << std::setprecision(17);
  out << "auction_rl-checkpoint " << Checkpoint::kVersion << "\n";
  out << "policy_kind " << checkpoint.policy_kind << "\n";
  out << "auction " << checkpoint.auction << "\n";
  out << "seed " << checkpoint.seed << "\n";
  out << "iteration " << checkpoint.iteration << "\n";
  out << "bid_grid " << checkpoint.bid_grid.size();
  for (double b : checkpoint.bid_grid) out << " " << b;
  out << "\n";
  out << "networks " << checkpoint.networks.size() << "\n";
  for (const NetworkRecord& net : checkpoint.networks) {
    out << "network " << net.role << " " << net.agent << "\n";
    out << "layers " << net.layer_sizes.size();
    for (int s : net.layer_sizes) out << " " << s;
    out << "\n";
    out << "bid_scale " << net.bid_scale << "\n";
    out << "log_std " << net.log_std << "\n";
    out << "params " << net.params.size() << "\n";
    for (double p : net.params) out << p << "\n";
  }
  out << "end\n";
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint ReadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  Checkpoint c;
  const int version = ReadField<int>(in, "auction_rl-checkpoint");
  if (version != Checkpoint::kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  c.policy_kind = ReadField<std::string>(in, "policy_kind");
  c.auction = ReadField<std::string>(in, "auction");
  c.seed = ReadField<uint64_t>(in, "seed");
  c.iteration = ReadField<int>(in, "iteration");
  c.bid_grid.resize(ReadField<size_t>(in, "bid_grid"));
  for (double& b : c.bid_grid) in >> b;
  c.networks.resize(ReadField<size_t>(in, "networks"));
  for (NetworkRecord& net : c.networks) {
    net.role = ReadField<std::string>(in, "network");
    in >> net.agent;
    net.layer_sizes.resize(ReadField<size_t>(in, "layers"));
    for (int& s : net.layer_sizes) in >> s;
    net.bid_scale = ReadField<double>(in, "bid_scale");
    net.log_std = ReadField<double>(in, "log_std");
    net.params.resize(ReadField<size_t>(in, "params"));
    for (double& p : net.params) in >> p;
  }
  std::string tail;
  if (!(in >> tail) || tail != "end") throw std::runtime_error("checkpoint: truncated " + path);
  return c;
}

NetworkRecord ToRecord(const Mlp& net, const std::string& role, int agent) {
  NetworkRecord r;
  r.role = role;
  r.agent = agent;
  r.layer_sizes = net.layer_sizes();
  r.params.assign(net.params().begin(), net.params().end());
  return r;
}

NetworkRecord ToRecord(const GaussianPolicy& policy, int agent) {
  NetworkRecord r = ToRecord(policy.mean_net(), "policy", agent);
  r.bid_scale = policy.bid_scale();
  r.log_std = policy.log_std();
  return r;
}

Mlp MlpFromRecord(const NetworkRecord& record) {
  Rng rng(0);
  Mlp net(record.layer_sizes, rng, 1.0);
  net.set_params(record.params);
  return net;
}

GaussianPolicy GaussianFromRecord(const NetworkRecord& record) {
  return GaussianPolicy(MlpFromRecord(record), record.bid_scale, record.log_std);
}

}  // namespace auction_rl
