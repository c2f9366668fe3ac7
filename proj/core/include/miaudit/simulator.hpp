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

#ifndef MIAUDIT_SIMULATOR_HPP_
#define MIAUDIT_SIMULATOR_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "miaudit/rng.hpp"
#include "miaudit/types.hpp"

namespace miaudit {

// Defaults are tuned so that a seeded run shows the memorization gap the
// attacks need (see README, "Simulator defaults").
struct SimConfig {
  std::size_t latent_dim = 16;
  std::size_t input_dim_img = 256;
  std::size_t input_dim_txt = 64;
  std::size_t hidden_dim = 128;
  std::size_t embed_dim = 32;
  std::size_t n_train = 2000;
  std::size_t n_nonmember_in = 2000;
  std::size_t n_nonmember_shift = 4000;
  double noise_std = 0.7;
  double shift_scale = 0.9;
  bool shift_on_manifold = true;  // false: independent random input-space offsets
  double temperature = 0.07;
  std::size_t epochs = 200;
  double lr = 0.05;
  std::size_t batch = 256;
  double weight_decay = 0.0;
  bool train_augment = false;
  std::size_t k_transforms = 6;
  std::uint64_t seed = 0;
};

// Throws ConfigError on any violated constraint.
void validate(const SimConfig& cfg);

enum class Pool { kMember, kNonMemberIn, kNonMemberShift };

std::string to_string(Pool pool);

struct PairSet {
  Pool pool = Pool::kMember;
  std::uint64_t first_id = 0;  // record i gets id first_id + i
  Eigen::MatrixXd x;           // one pair per row
  Eigen::MatrixXd y;
};

// Mixing matrices shared by every pool of one seed; `offset_*` is the mean
// shift of the shifted pool, placed on the data manifold (A mu, B mu).
struct Generator {
  Eigen::MatrixXd a;  // input_dim_img x latent_dim
  Eigen::MatrixXd b;  // input_dim_txt x latent_dim
  Eigen::VectorXd offset_img;
  Eigen::VectorXd offset_txt;
};

Generator make_generator(const SimConfig& cfg);

PairSet generate_pairs(const SimConfig& cfg, Pool pool);
PairSet generate_pairs(const SimConfig& cfg, const Generator& gen, Pool pool);

struct Tower {
  Eigen::MatrixXd w1;  // hidden x in
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // embed x hidden
  Eigen::VectorXd b2;

  // Row-wise unit-norm embeddings. Throws DomainError if a pre-normalization
  // output is exactly zero.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
};

class TwoTowerModel : public TargetModel<Eigen::VectorXd, Eigen::VectorXd> {
 public:
  TwoTowerModel() = default;
  TwoTowerModel(Tower img, Tower txt, double temperature);

  // Uniform +-1/sqrt(fan_in) weights, zero biases.
  static TwoTowerModel initialized(std::size_t d_img, std::size_t d_txt, std::size_t hidden, std::size_t embed,
                                   double temperature, std::uint64_t seed);

  EmbeddingVec embed_image(const Eigen::VectorXd& x) const override;
  EmbeddingVec embed_text(const Eigen::VectorXd& y) const override;

  Tower& img() { return img_; }
  Tower& txt() { return txt_; }
  const Tower& img() const { return img_; }
  const Tower& txt() const { return txt_; }
  double temperature() const { return temperature_; }

  std::size_t parameter_count() const;
  // img tower then txt tower; each tower w1 (row-major), b1, w2, b2.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& flat);
  double squared_norm() const;

 private:
  Tower img_;
  Tower txt_;
  double temperature_ = 0.07;
};

struct LogitLoss {
  double loss = 0.0;
  Eigen::MatrixXd dlogits;
};

// Half the sum of the mean row-wise and mean column-wise cross-entropy with
// the diagonal as target, and its gradient with respect to the logits.
LogitLoss symmetric_infonce(const Eigen::MatrixXd& logits);

struct ContrastiveGrads {
  double loss = 0.0;             // contrastive part plus weight_decay * ||theta||^2
  double contrastive_loss = 0.0;
  Tower img;
  Tower txt;
};

// Symmetric InfoNCE over a batch of B >= 2 pairs with logits
// CS(img_i, txt_j) / temperature. Throws ValidationError for B < 2.
ContrastiveGrads contrastive_loss_and_grads(const TwoTowerModel& model, const Eigen::MatrixXd& x,
                                            const Eigen::MatrixXd& y, double weight_decay = 0.0);

struct TargetTraining {
  TwoTowerModel model;
  std::vector<double> epoch_loss;  // mean contrastive batch loss per epoch
};

// Plain SGD over shuffled member mini-batches. Throws TrainingError on a
// non-finite loss.
TargetTraining train_target(const SimConfig& cfg, const PairSet& members);
TargetTraining train_target(const SimConfig& cfg);

enum class TransformKind { kAddNoise, kMask, kRotate2D, kScale, kShift, kFlipSign };

inline constexpr TransformKind kTransformFamily[] = {TransformKind::kAddNoise, TransformKind::kMask,
                                                     TransformKind::kRotate2D, TransformKind::kScale,
                                                     TransformKind::kShift,    TransformKind::kFlipSign};

std::string to_string(TransformKind kind);

// One input-space transform. Structural choices (masked and flipped
// coordinates, rotation plane, shift vector) are drawn once from `seed`;
// AddNoise draws fresh noise from the rng passed to apply().
class InputTransform {
 public:
  InputTransform(TransformKind kind, std::size_t dim, std::uint64_t seed);

  TransformKind kind() const { return kind_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x, Rng& rng) const;

 private:
  TransformKind kind_;
  std::size_t dim_;
  std::vector<std::size_t> coords_;
  std::size_t plane_i_ = 0;
  std::size_t plane_j_ = 0;
  Eigen::VectorXd shift_;
};

// Convenience wrapper: builds the transform from `seed` and applies it with
// an rng derived from the same seed.
Eigen::VectorXd input_transform(const Eigen::VectorXd& x, TransformKind kind, std::uint64_t seed);

// Embeds every pair; transformed channel k uses the k-th member of the
// transform family (cycled when k_transforms > 6), built from a seed shared
// by all pools so channels are comparable across files.
FeatureSet export_features(const TwoTowerModel& model, const PairSet& pairs, const SimConfig& cfg,
                           unsigned threads = 1);

struct SimulationRun {
  SimConfig config;
  TargetTraining training;
  FeatureSet members;
  FeatureSet nonmembers_in;
  FeatureSet nonmembers_shift;
};

// Full pipeline: generate, train, export all three pools.
SimulationRun simulate(const SimConfig& cfg, unsigned threads = 1);

}  // namespace miaudit

#endif  // MIAUDIT_SIMULATOR_HPP_
