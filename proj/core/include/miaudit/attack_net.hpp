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

#ifndef MIAUDIT_ATTACK_NET_HPP_
#define MIAUDIT_ATTACK_NET_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace miaudit {

// One affine map. `weight` is out x in.
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

// Feed-forward membership classifier: ReLU on hidden layers, logistic output.
class AttackNet {
 public:
  AttackNet() = default;

  // All-zero parameters for dims [d_in, h_1, ..., 1]. Throws ValidationError
  // unless there are at least two dims, all positive, ending in 1.
  explicit AttackNet(std::vector<std::size_t> layer_dims);

  // Zero-mean uniform init in +-1/sqrt(fan_in) for weights and biases.
  static AttackNet initialized(std::vector<std::size_t> layer_dims, std::uint64_t seed);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Probability of "member" for one feature vector. Throws DomainError on a
  // dimension mismatch.
  double forward(std::span<const double> features) const;

  // Row-wise probabilities for a batch (one example per row).
  Eigen::VectorXd forward_batch(const Eigen::MatrixXd& features) const;

  // Layer-major flattening: each layer's weight (row-major) then its bias.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);

  bool all_finite() const;

  friend bool operator==(const AttackNet& a, const AttackNet& b);

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

// Training example: concatenated features and binary label b.
struct AttackExample {
  std::vector<double> features;
  int label = 0;
};

struct LossAndGrads {
  double loss = 0.0;
  std::vector<DenseLayer> grads;  // parameter-shaped, same layout as the net
};

inline constexpr double kProbabilityClamp = 1e-12;

// Mean binary cross-entropy with p clamped to [1e-12, 1 - 1e-12] and its
// exact gradient (zero for examples whose probability sits on the clamp).
LossAndGrads loss_and_grads(const AttackNet& net, std::span<const AttackExample> batch);
LossAndGrads loss_and_grads(const AttackNet& net, const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& labels);

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 256;
  std::size_t epochs = 50;
  double holdout_fraction = 0.1;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
};

// Throws ValidationError when a field is outside its documented range.
void validate(const TrainConfig& cfg);

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double holdout_loss = 0.0;
  double holdout_acc = 0.0;
};

struct TrainResult {
  AttackNet net;                  // snapshot with the lowest held-out loss
  std::vector<EpochStats> log;    // row 0 is the untrained snapshot
  std::size_t best_epoch = 0;
};

inline const std::vector<std::size_t> kDefaultHiddenDims = {256, 64};

// Mini-batch SGD with momentum on a seeded shuffle, early-stopped on a
// held-out split. Deterministic for fixed (examples, cfg, hidden_dims).
// Throws ValidationError for fewer than two examples, a single class, or
// inconsistent feature dims.
TrainResult train(std::span<const AttackExample> examples, const TrainConfig& cfg,
                  std::span<const std::size_t> hidden_dims = kDefaultHiddenDims);

// `epoch,train_loss,holdout_loss,holdout_acc` CSV.
void write_training_log(const std::filesystem::path& path, std::span<const EpochStats> log);

}  // namespace miaudit

#endif  // MIAUDIT_ATTACK_NET_HPP_
