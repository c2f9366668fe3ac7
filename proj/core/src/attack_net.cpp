/*
 * Copyright 2026 The miaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "miaudit/attack_net.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "miaudit/error.hpp"
#include "miaudit/rng.hpp"

namespace miaudit {

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // a_0 = input, a_l after layer l
  std::vector<Eigen::MatrixXd> pre;          // z_l before the nonlinearity
};

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

ForwardCache run_forward(const AttackNet& net, const Eigen::MatrixXd& x) {
  ForwardCache c;
  const auto& layers = net.layers();
  c.activations.reserve(layers.size() + 1);
  c.pre.reserve(layers.size());
  c.activations.push_back(x);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = c.activations.back() * layers[l].weight.transpose();
    z.rowwise() += layers[l].bias.transpose();
    c.pre.push_back(z);
    if (l + 1 < layers.size()) {
      c.activations.push_back(z.cwiseMax(0.0));
    } else {
      c.activations.push_back(sigmoid(z.col(0)));
    }
  }
  return c;
}

double clamp_p(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

double bce(double p, double label) {
  const double q = clamp_p(p);
  return -(label * std::log(q) + (1.0 - label) * std::log(1.0 - q));
}

struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Dataset gather(std::span<const AttackExample> examples, std::span<const std::size_t> idx, std::size_t dim) {
  Dataset d{Eigen::MatrixXd(idx.size(), dim), Eigen::VectorXd(idx.size())};
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const AttackExample& e = examples[idx[r]];
    d.x.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::RowVectorXd>(e.features.data(), static_cast<Eigen::Index>(dim));
    d.y(static_cast<Eigen::Index>(r)) = e.label;
  }
  return d;
}

std::pair<double, double> loss_and_accuracy(const AttackNet& net, const Dataset& d) {
  const Eigen::VectorXd p = net.forward_batch(d.x);
  double loss = 0.0;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    loss += bce(p(i), d.y(i));
    correct += (p(i) >= 0.5) == (d.y(i) > 0.5);
  }
  const double n = static_cast<double>(p.size());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

AttackNet::AttackNet(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw ValidationError("attack net needs at least an input and an output dim");
  for (std::size_t d : dims_) {
    if (d == 0) throw ValidationError("attack net layer dims must be positive");
  }
  if (dims_.back() != 1) throw ValidationError("attack net output dim must be 1");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(dims_[l + 1]);
    const auto in = static_cast<Eigen::Index>(dims_[l]);
    layers_.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
}

AttackNet AttackNet::initialized(std::vector<std::size_t> layer_dims, std::uint64_t seed) {
  AttackNet net(std::move(layer_dims));
  Rng rng(seed);
  for (DenseLayer& layer : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = rng.uniform(-bound, bound);
  }
  return net;
}

std::size_t AttackNet::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

double AttackNet::forward(std::span<const double> features) const {
  if (features.size() != input_dim()) {
    throw DomainError("attack net expects " + std::to_string(input_dim()) + " features, got " +
                      std::to_string(features.size()));
  }
  Eigen::MatrixXd x = Eigen::Map<const Eigen::RowVectorXd>(features.data(), static_cast<Eigen::Index>(features.size()));
  return forward_batch(x)(0);
}

Eigen::VectorXd AttackNet::forward_batch(const Eigen::MatrixXd& features) const {
  if (static_cast<std::size_t>(features.cols()) != input_dim()) {
    throw DomainError("attack net expects " + std::to_string(input_dim()) + " features, got " +
                      std::to_string(features.cols()));
  }
  return run_forward(*this, features).activations.back().col(0);
}

std::vector<double> AttackNet::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const DenseLayer& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  }
  return flat;
}

void AttackNet::set_flat_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ValidationError("parameter vector has the wrong length");
  std::size_t i = 0;
  for (DenseLayer& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[i++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[i++];
  }
}

bool AttackNet::all_finite() const {
  for (const DenseLayer& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool operator==(const AttackNet& a, const AttackNet& b) {
  return a.dims_ == b.dims_ && a.flat_parameters() == b.flat_parameters();
}

LossAndGrads loss_and_grads(const AttackNet& net, const Eigen::MatrixXd& features, const Eigen::VectorXd& labels) {
  if (features.rows() == 0) throw ValidationError("loss_and_grads: empty batch");
  if (labels.size() != features.rows()) throw ValidationError("loss_and_grads: label count mismatch");
  const ForwardCache c = run_forward(net, features);
  const Eigen::VectorXd p = c.activations.back().col(0);
  const double n = static_cast<double>(features.rows());

  LossAndGrads out;
  Eigen::MatrixXd delta(features.rows(), 1);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out.loss += bce(p(i), labels(i));
    const bool clamped = p(i) < kProbabilityClamp || p(i) > 1.0 - kProbabilityClamp;
    // d/dz of BCE(sigmoid(z)) is p - b.
    delta(i, 0) = clamped ? 0.0 : (p(i) - labels(i)) / n;
  }
  out.loss /= n;

  const auto& layers = net.layers();
  out.grads.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    out.grads[l].weight = delta.transpose() * c.activations[l];
    out.grads[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * layers[l].weight;
      delta = back.cwiseProduct((c.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return out;
}

LossAndGrads loss_and_grads(const AttackNet& net, std::span<const AttackExample> batch) {
  if (batch.empty()) throw ValidationError("loss_and_grads: empty batch");
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (const AttackExample& e : batch) {
    if (e.features.size() != net.input_dim()) throw DomainError("loss_and_grads: feature dimension mismatch");
  }
  const Dataset d = gather(batch, idx, net.input_dim());
  return loss_and_grads(net, d.x, d.y);
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
  if (cfg.batch_size == 0) throw ValidationError("batch_size must be positive");
  if (cfg.epochs == 0) throw ValidationError("epochs must be positive");
  if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction <= 0.5)) {
    throw ValidationError("holdout_fraction must be in (0, 0.5]");
  }
  if (cfg.patience == 0) throw ValidationError("patience must be positive");
}

TrainResult train(std::span<const AttackExample> examples, const TrainConfig& cfg,
                  std::span<const std::size_t> hidden_dims) {
  validate(cfg);
  if (examples.size() < 2) throw ValidationError("training needs at least two examples");
  const std::size_t dim = examples.front().features.size();
  if (dim == 0) throw ValidationError("training examples have no features");
  bool has0 = false, has1 = false;
  for (const AttackExample& e : examples) {
    if (e.features.size() != dim) throw ValidationError("training examples have inconsistent dims");
    if (e.label != 0 && e.label != 1) throw ValidationError("labels must be 0 or 1");
    (e.label ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw ValidationError("training needs both labels present");

  std::vector<std::size_t> dims{dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(1);

  Rng split_rng(derive_seed(cfg.seed, {1}));
  std::vector<std::size_t> perm = split_rng.permutation(examples.size());
  std::size_t n_hold = static_cast<std::size_t>(std::floor(cfg.holdout_fraction * static_cast<double>(examples.size())));
  n_hold = std::clamp<std::size_t>(n_hold, 1, examples.size() - 1);
  std::vector<std::size_t> hold_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> train_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
  std::sort(hold_idx.begin(), hold_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  const Dataset hold = gather(examples, hold_idx, dim);
  const Dataset full_train = gather(examples, train_idx, dim);

  AttackNet net = AttackNet::initialized(dims, derive_seed(cfg.seed, {2}));
  Rng shuffle_rng(derive_seed(cfg.seed, {3}));

  TrainResult result;
  auto record = [&](std::size_t epoch) {
    const auto [train_loss, train_acc] = loss_and_accuracy(net, full_train);
    (void)train_acc;
    const auto [hold_loss, hold_acc] = loss_and_accuracy(net, hold);
    result.log.push_back({epoch, train_loss, hold_loss, hold_acc});
    return hold_loss;
  };

  double best_loss = record(0);
  result.net = net;
  result.best_epoch = 0;

  std::vector<DenseLayer> velocity;
  for (const DenseLayer& l : net.layers()) {
    velocity.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  }

  std::size_t since_best = 0;
  std::vector<std::size_t> order(train_idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::size_t> batch_idx;
      batch_idx.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch_idx.push_back(train_idx[order[i]]);
      const Dataset batch = gather(examples, batch_idx, dim);
      const LossAndGrads lg = loss_and_grads(net, batch.x, batch.y);
      for (std::size_t l = 0; l < velocity.size(); ++l) {
        velocity[l].weight = cfg.momentum * velocity[l].weight - cfg.learning_rate * lg.grads[l].weight;
        velocity[l].bias = cfg.momentum * velocity[l].bias - cfg.learning_rate * lg.grads[l].bias;
        net.layers()[l].weight += velocity[l].weight;
        net.layers()[l].bias += velocity[l].bias;
      }
    }
    const double hold_loss = record(epoch);
    if (!std::isfinite(hold_loss) || !net.all_finite()) break;
    if (hold_loss < best_loss) {
      best_loss = hold_loss;
      result.net = net;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

void write_training_log(const std::filesystem::path& path, std::span<const EpochStats> log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "epoch,train_loss,holdout_loss,holdout_acc\n";
  char buf[128];
  for (const EpochStats& e : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss, e.holdout_loss, e.holdout_acc);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace miaudit
