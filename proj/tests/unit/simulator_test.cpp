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

#include "miaudit/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "miaudit/attacks.hpp"
#include "miaudit/error.hpp"
#include "miaudit/feature_io.hpp"
#include "miaudit/metrics.hpp"
#include "test_support.hpp"

namespace miaudit {
namespace {

// Small enough to train in well under a second.
SimConfig tiny_config(std::uint64_t seed) {
  SimConfig c;
  c.latent_dim = 4;
  c.input_dim_img = 24;
  c.input_dim_txt = 12;
  c.hidden_dim = 32;
  c.embed_dim = 8;
  c.n_train = 256;
  c.n_nonmember_in = 256;
  c.n_nonmember_shift = 256;
  c.noise_std = 0.7;
  c.epochs = 150;
  c.batch = 64;
  c.k_transforms = 2;
  c.seed = seed;
  return c;
}

// Symmetric cross-entropy written out term by term.
double reference_infonce(const Eigen::MatrixXd& logits) {
  const Eigen::Index b = logits.rows();
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < b; ++i) {
    long double row = 0.0L, col = 0.0L;
    for (Eigen::Index j = 0; j < b; ++j) {
      row += std::exp(static_cast<long double>(logits(i, j) - logits(i, i)));
      col += std::exp(static_cast<long double>(logits(j, i) - logits(i, i)));
    }
    total += std::log(row) + std::log(col);
  }
  return static_cast<double>(total / (2.0L * b));
}

double reference_loss(const TwoTowerModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double alpha) {
  const Eigen::MatrixXd u = model.img().forward(x), v = model.txt().forward(y);
  double norm2 = 0.0;
  for (double p : model.flat_parameters()) norm2 += p * p;
  return reference_infonce(u * v.transpose() / model.temperature()) + alpha * norm2;
}

double mean_cs(const FeatureSet& set) {
  double s = 0.0;
  for (double v : batch_cs(set)) s += v;
  return s / static_cast<double>(set.size());
}

TEST(InfoNceTest, ConfidentTwoByTwo) {
  Eigen::MatrixXd logits(2, 2);
  logits << 10, -10, -10, 10;
  const double expected = std::log1p(std::exp(-20.0));  // 2.0611536e-9
  EXPECT_NEAR(symmetric_infonce(logits).loss, expected, 1e-18);
  EXPECT_NEAR(symmetric_infonce(logits).loss, 2.06e-9, 1e-11);
}

TEST(InfoNceTest, MatchesReferenceAndUniformBound) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index b = 2 + static_cast<Eigen::Index>(rng.below(8));
    Eigen::MatrixXd logits(b, b);
    for (Eigen::Index i = 0; i < b * b; ++i) logits.data()[i] = rng.normal(0.0, 5.0);
    EXPECT_NEAR(symmetric_infonce(logits).loss, reference_infonce(logits), 1e-12);
  }
  EXPECT_NEAR(symmetric_infonce(Eigen::MatrixXd::Zero(4, 4)).loss, std::log(4.0), 1e-15);
  EXPECT_THROW(symmetric_infonce(Eigen::MatrixXd::Zero(1, 1)), ValidationError);
  EXPECT_THROW(symmetric_infonce(Eigen::MatrixXd::Zero(2, 3)), ValidationError);
}

TEST(ContrastiveGradTest, MatchesFiniteDifferences) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d_img = 2 + rng.below(3), d_txt = 2 + rng.below(3), hidden = 2 + rng.below(3),
                      embed = 2 + rng.below(2);
    auto model = TwoTowerModel::initialized(d_img, d_txt, hidden, embed, 0.07 + 0.5 * rng.uniform(), rng.next_u64());
    ASSERT_LE(model.parameter_count(), 200u);
    // Nudge biases off zero so ReLU kinks are not hit at h = 1e-6.
    auto params = model.flat_parameters();
    for (double& p : params) p += 0.05 * rng.normal();
    model.set_flat_parameters(params);

    const Eigen::Index b = 2 + static_cast<Eigen::Index>(rng.below(4));
    Eigen::MatrixXd x(b, d_img), y(b, d_txt);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
    const double alpha = trial % 2 == 0 ? 0.0 : 0.1;

    const ContrastiveGrads g = contrastive_loss_and_grads(model, x, y, alpha);
    EXPECT_NEAR(g.loss, reference_loss(model, x, y, alpha), 1e-12);

    TwoTowerModel grads_as_model(g.img, g.txt, model.temperature());
    const auto analytic = grads_as_model.flat_parameters();
    const double h = 1e-5;
    for (std::size_t i = 0; i < params.size(); ++i) {
      // five-point stencil; rounding in the loss stays well below 1e-6 at this h
      const double keep = params[i];
      double at[4];
      const double steps[4] = {-2 * h, -h, h, 2 * h};
      for (int s = 0; s < 4; ++s) {
        params[i] = keep + steps[s];
        model.set_flat_parameters(params);
        at[s] = reference_loss(model, x, y, alpha);
      }
      params[i] = keep;
      model.set_flat_parameters(params);
      const double numeric = (at[0] - 8 * at[1] + 8 * at[2] - at[3]) / (12 * h);
      const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-4});
      EXPECT_LT(std::abs(numeric - analytic[i]) / denom, 1e-6) << "trial " << trial << " param " << i;
    }
  }
}

TEST(ContrastiveGradTest, RejectsSingletonBatch) {
  const auto model = TwoTowerModel::initialized(3, 3, 4, 2, 0.07, 1);
  EXPECT_THROW(contrastive_loss_and_grads(model, Eigen::MatrixXd::Ones(1, 3), Eigen::MatrixXd::Ones(1, 3)),
               ValidationError);
}

TEST(GeneratePairsTest, NoiselessPairsLieOnSharedLatents) {
  auto cfg = tiny_config(3);
  cfg.noise_std = 0.0;
  const Generator gen = make_generator(cfg);
  const PairSet p = generate_pairs(cfg, gen, Pool::kNonMemberIn);
  // Recover z from x alone, then predict y from it.
  const Eigen::MatrixXd z = gen.a.colPivHouseholderQr().solve(p.x.transpose());
  EXPECT_LT((gen.a * z - p.x.transpose()).norm(), 1e-9);
  EXPECT_LT((gen.b * z - p.y.transpose()).norm(), 1e-9);
}

TEST(GeneratePairsTest, ShiftedPoolMeanOffset) {
  auto cfg = tiny_config(4);
  cfg.n_nonmember_in = 2000;
  cfg.n_nonmember_shift = 2000;
  for (bool on_manifold : {true, false}) {
    cfg.shift_on_manifold = on_manifold;
    const Generator gen = make_generator(cfg);
    const auto in = generate_pairs(cfg, gen, Pool::kNonMemberIn);
    const auto sh = generate_pairs(cfg, gen, Pool::kNonMemberShift);
    const double observed = (sh.x.colwise().mean() - in.x.colwise().mean()).norm();
    const double target = cfg.shift_scale * std::sqrt(static_cast<double>(cfg.input_dim_img));
    EXPECT_NEAR(observed, target, 0.1 * target) << on_manifold;
  }
}

TEST(GeneratePairsTest, DeterministicIdsAndPools) {
  const auto cfg = tiny_config(5);
  const auto a = generate_pairs(cfg, Pool::kMember), b = generate_pairs(cfg, Pool::kMember);
  EXPECT_EQ(a.x, b.x);
  const auto in = generate_pairs(cfg, Pool::kNonMemberIn);
  EXPECT_NE(a.x, in.x);
  EXPECT_EQ(a.first_id, 0u);
  EXPECT_EQ(in.first_id, cfg.n_train);
  EXPECT_EQ(generate_pairs(cfg, Pool::kNonMemberShift).first_id, cfg.n_train + cfg.n_nonmember_in);
}

TEST(TwoTowerModelTest, ParametersRoundTrip) {
  auto m = TwoTowerModel::initialized(5, 4, 3, 2, 0.07, 9);
  EXPECT_EQ(m.parameter_count(), (3u * 5 + 3 + 2 * 3 + 2) + (3u * 4 + 3 + 2 * 3 + 2));
  auto flat = m.flat_parameters();
  for (double& p : flat) p *= 2.0;
  m.set_flat_parameters(flat);
  EXPECT_EQ(m.flat_parameters(), flat);
  double sq = 0.0;
  for (double p : flat) sq += p * p;
  EXPECT_NEAR(m.squared_norm(), sq, 1e-12);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(5);
  double n = 0.0;
  const EmbeddingVec e = m.embed_image(x);
  for (float v : e.values()) n += static_cast<double>(v) * v;
  EXPECT_NEAR(n, 1.0, 1e-6);
}

TEST(TrainTargetTest, LearnsAndOverfits) {
  const auto cfg = tiny_config(7);
  const auto run = simulate(cfg);
  ASSERT_EQ(run.training.epoch_loss.size(), cfg.epochs);
  EXPECT_LT(run.training.epoch_loss.back(), std::log(static_cast<double>(cfg.batch)));
  EXPECT_LT(run.training.epoch_loss.back(), run.training.epoch_loss.front());
  EXPECT_GT(mean_cs(run.members), mean_cs(run.nonmembers_in));
}

TEST(TrainTargetTest, DeterministicPerSeed) {
  auto cfg = tiny_config(8);
  cfg.epochs = 5;
  EXPECT_EQ(train_target(cfg).model.flat_parameters(), train_target(cfg).model.flat_parameters());
  cfg.train_augment = true;
  EXPECT_EQ(train_target(cfg).model.flat_parameters(), train_target(cfg).model.flat_parameters());
}

TEST(TrainTargetTest, UntrainedModelHasNoMembershipSignal) {
  auto cfg = tiny_config(9);
  cfg.epochs = 0;
  const auto run = simulate(cfg);
  EXPECT_TRUE(run.training.epoch_loss.empty());
  const std::vector<FeatureSet> parts = {run.members, run.nonmembers_in};
  const auto eval = concat(parts);
  EXPECT_NEAR(auc(label_scores(eval, csa_scores(eval))), 0.5, 0.1);
}

TEST(TrainTargetTest, WeightDecayShrinksMembershipGap) {
  double gap0 = 0.0, gap1 = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto cfg = tiny_config(100 + seed);
    const auto a = simulate(cfg);
    gap0 += mean_cs(a.members) - mean_cs(a.nonmembers_in);
    cfg.weight_decay = 0.1;
    const auto b = simulate(cfg);
    gap1 += mean_cs(b.members) - mean_cs(b.nonmembers_in);
  }
  EXPECT_LT(gap1, gap0);
}

TEST(InputTransformTest, Scale) {
  Rng rng(10);
  Eigen::VectorXd x(7);
  for (auto& v : x) v = rng.normal();
  const Eigen::VectorXd y = input_transform(x, TransformKind::kScale, 3);
  for (Eigen::Index i = 0; i < 7; ++i) EXPECT_EQ(y(i), 0.9 * x(i));
}

TEST(InputTransformTest, MaskAndFlipCounts) {
  for (std::size_t dim : {10u, 37u, 256u}) {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(dim), 1.0, 2.0);
    const auto expected = static_cast<Eigen::Index>(std::floor(0.1 * static_cast<double>(dim)));
    const Eigen::VectorXd m = input_transform(x, TransformKind::kMask, dim);
    EXPECT_EQ((m.array() == 0.0).count(), expected);
    EXPECT_EQ((m.array() != x.array()).count(), expected);
    const Eigen::VectorXd f = input_transform(x, TransformKind::kFlipSign, dim);
    EXPECT_EQ((f.array() < 0.0).count(), expected);
    EXPECT_EQ((f.array().abs() == x.array()).count(), static_cast<Eigen::Index>(dim));
  }
}

TEST(InputTransformTest, RotateShiftNoise) {
  Rng rng(11);
  Eigen::VectorXd x(64);
  for (auto& v : x) v = rng.normal();
  const Eigen::VectorXd r = input_transform(x, TransformKind::kRotate2D, 5);
  EXPECT_NEAR(r.norm(), x.norm(), 1e-12);
  EXPECT_EQ((r.array() != x.array()).count(), 2);
  const Eigen::VectorXd s = input_transform(x, TransformKind::kShift, 5);
  EXPECT_NEAR((s - x).norm(), 0.1 * 8.0, 1e-12);
  const Eigen::VectorXd n1 = input_transform(x, TransformKind::kAddNoise, 5);
  const Eigen::VectorXd n2 = input_transform(x, TransformKind::kAddNoise, 5);
  EXPECT_EQ(n1, n2);
  EXPECT_NEAR((n1 - x).squaredNorm() / 64.0, 0.0025, 0.0015);
  EXPECT_NE(input_transform(x, TransformKind::kAddNoise, 6), n1);
}

TEST(ExportTest, ChannelsNamesAndRoundTrip) {
  auto cfg = tiny_config(12);
  cfg.epochs = 3;
  const auto run = simulate(cfg, 2);
  EXPECT_EQ(run.members.transform_names(), (std::vector<std::string>{"add_noise", "mask"}));
  EXPECT_EQ(run.members.meta().at("dataset"), "simulator/member");
  for (const auto& r : run.nonmembers_shift.records()) EXPECT_EQ(r.tag, MembershipTag::kNonMember);
  testing::TempDir dir("export");
  write_feature_set(run.nonmembers_in, dir / "in.miaf");
  EXPECT_EQ(read_feature_set(dir / "in.miaf"), run.nonmembers_in);

  cfg.k_transforms = 0;
  const auto bare = export_features(run.training.model, generate_pairs(cfg, Pool::kMember), cfg);
  EXPECT_EQ(bare.k_transforms(), 0u);
  for (const auto& r : bare.records()) EXPECT_TRUE(r.transformed.empty());
}

TEST(ExportTest, ThreadCountDoesNotChangeOutput) {
  auto cfg = tiny_config(13);
  cfg.epochs = 2;
  const auto model = train_target(cfg).model;
  const auto pairs = generate_pairs(cfg, Pool::kNonMemberShift);
  EXPECT_EQ(export_features(model, pairs, cfg, 1), export_features(model, pairs, cfg, 3));
}

TEST(SimConfigTest, Validation) {
  auto bad = [](auto mutate) {
    SimConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(validate(bad([](SimConfig& c) { c.latent_dim = 0; })), ConfigError);
  EXPECT_THROW(validate(bad([](SimConfig& c) { c.temperature = 0.0; })), ConfigError);
  EXPECT_THROW(validate(bad([](SimConfig& c) { c.batch = 0; })), ConfigError);
  EXPECT_THROW(validate(bad([](SimConfig& c) { c.weight_decay = -1.0; })), ConfigError);
  EXPECT_THROW(validate(bad([](SimConfig& c) { c.noise_std = -0.1; })), ConfigError);
  EXPECT_NO_THROW(validate(SimConfig{}));
}

}  // namespace
}  // namespace miaudit
