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

#include <gtest/gtest.h>

#include <cmath>

#include "miaudit/error.hpp"
#include "miaudit/rng.hpp"

namespace miaudit {
namespace {

std::vector<double> flatten(const std::vector<DenseLayer>& layers) {
  std::vector<double> out;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

std::vector<AttackExample> blobs(Rng& rng, std::size_t n, std::size_t dim, double separation) {
  std::vector<AttackExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    AttackExample e;
    e.label = static_cast<int>(i % 2);
    for (std::size_t d = 0; d < dim; ++d) {
      const double center = d == 0 ? (e.label ? separation / 2 : -separation / 2) : 0.0;
      e.features.push_back(rng.normal(center, 1.0));
    }
    out.push_back(std::move(e));
  }
  return out;
}

// Central differences of the mean BCE, recomputed from forward() alone.
double bce(const AttackNet& net, const std::vector<AttackExample>& batch) {
  double s = 0.0;
  for (const auto& e : batch) {
    const double p = std::clamp(net.forward(e.features), kProbabilityClamp, 1.0 - kProbabilityClamp);
    s -= e.label ? std::log(p) : std::log(1.0 - p);
  }
  return s / static_cast<double>(batch.size());
}

TEST(AttackNetTest, HandComputedForward) {
  AttackNet net({2, 1});
  net.layers()[0].weight << 1.0, 1.0;
  const std::vector<double> x = {0.3, -0.3};
  EXPECT_DOUBLE_EQ(net.forward(x), 0.5);
}

TEST(AttackNetTest, HalfProbabilityLossIsLn2) {
  AttackNet net({3, 1});
  std::vector<AttackExample> batch = {{{1, 2, 3}, 1}, {{-1, 0, 4}, 0}};
  EXPECT_NEAR(loss_and_grads(net, batch).loss, std::log(2.0), 1e-15);
}

TEST(AttackNetTest, ConfidentCorrectLossIsTiny) {
  AttackNet net({1, 1});
  net.layers()[0].weight << 100.0;
  std::vector<AttackExample> batch = {{{1}, 1}, {{-1}, 0}};
  EXPECT_LE(loss_and_grads(net, batch).loss, 1e-11);
}

TEST(AttackNetTest, BadDimsRejected) {
  EXPECT_THROW(AttackNet({4}), ValidationError);
  EXPECT_THROW(AttackNet({4, 2}), ValidationError);
  EXPECT_THROW(AttackNet({0, 1}), ValidationError);
  AttackNet net({2, 1});
  const std::vector<double> x = {1, 2, 3};
  EXPECT_THROW(net.forward(x), DomainError);
}

TEST(AttackNetTest, FlatParametersRoundTrip) {
  auto net = AttackNet::initialized({5, 4, 3, 1}, 17);
  EXPECT_EQ(net.parameter_count(), 5u * 4 + 4 + 4 * 3 + 3 + 3 + 1);
  auto flat = net.flat_parameters();
  EXPECT_EQ(flat.size(), net.parameter_count());
  AttackNet other({5, 4, 3, 1});
  other.set_flat_parameters(flat);
  EXPECT_TRUE(other == net);
  for (double v : flat) {
    EXPECT_LE(std::abs(v), 1.0 / std::sqrt(3.0) + 1e-12);
  }
}

TEST(AttackNetTest, GradientsMatchFiniteDifferences) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d_in = 2 + rng.below(6);
    std::vector<std::size_t> dims = {d_in};
    for (std::size_t h = rng.below(3); h > 0; --h) dims.push_back(2 + rng.below(6));
    dims.push_back(1);
    auto net = AttackNet::initialized(dims, rng.next_u64());
    ASSERT_LE(net.parameter_count(), 200u);
    const auto batch = blobs(rng, 3 + rng.below(10), d_in, 1.0);

    const auto analytic = flatten(loss_and_grads(net, batch).grads);
    auto params = net.flat_parameters();
    const double h = 1e-5;
    for (std::size_t i = 0; i < params.size(); ++i) {
      // five-point stencil; rounding in the loss stays well below 1e-6 at this h
      const double keep = params[i];
      double at[4];
      const double steps[4] = {-2 * h, -h, h, 2 * h};
      for (int s = 0; s < 4; ++s) {
        params[i] = keep + steps[s];
        net.set_flat_parameters(params);
        at[s] = bce(net, batch);
      }
      params[i] = keep;
      net.set_flat_parameters(params);
      const double numeric = (at[0] - 8 * at[1] + 8 * at[2] - at[3]) / (12 * h);
      const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-4});
      EXPECT_LT(std::abs(numeric - analytic[i]) / denom, 1e-6) << "trial " << trial << " param " << i;
    }
  }
}

TEST(AttackNetTest, BatchAndMatrixOverloadsAgree) {
  Rng rng(8);
  const auto net = AttackNet::initialized({4, 5, 1}, 2);
  const auto batch = blobs(rng, 9, 4, 2.0);
  Eigen::MatrixXd x(9, 4);
  Eigen::VectorXd y(9);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = batch[i].features[j];
    y(i) = batch[i].label;
  }
  const auto a = loss_and_grads(net, batch), b = loss_and_grads(net, x, y);
  EXPECT_NEAR(a.loss, b.loss, 1e-14);
  const auto fa = flatten(a.grads), fb = flatten(b.grads);
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_NEAR(fa[i], fb[i], 1e-14);
  const auto p = net.forward_batch(x);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(p(i), net.forward(batch[i].features), 1e-15);
}

TEST(AttackTrainTest, SeparableBlobs) {
  Rng rng(12);
  const auto data = blobs(rng, 200, 4, 6.0);
  TrainConfig cfg;
  cfg.seed = 5;
  const auto result = train(data, cfg, std::vector<std::size_t>{16, 8});
  EXPECT_GE(result.log.at(result.best_epoch).holdout_acc, 0.95);
  std::size_t correct = 0;
  for (const auto& e : data) correct += (result.net.forward(e.features) >= 0.5) == (e.label == 1);
  EXPECT_GE(static_cast<double>(correct) / data.size(), 0.95);
  EXPECT_LT(result.log.back().train_loss, result.log.front().train_loss);
}

TEST(AttackTrainTest, DeterministicPerSeed) {
  Rng rng(13);
  const auto data = blobs(rng, 120, 3, 2.0);
  TrainConfig cfg;
  cfg.seed = 9;
  cfg.epochs = 8;
  const std::vector<std::size_t> hidden = {6};
  const auto a = train(data, cfg, hidden), b = train(data, cfg, hidden);
  EXPECT_EQ(a.net.flat_parameters(), b.net.flat_parameters());
  cfg.seed = 10;
  EXPECT_NE(train(data, cfg, hidden).net.flat_parameters(), a.net.flat_parameters());
}

TEST(AttackTrainTest, RejectsDegenerateInput) {
  std::vector<AttackExample> one_class = {{{1, 2}, 1}, {{2, 3}, 1}, {{0, 1}, 1}};
  EXPECT_THROW(train(one_class, TrainConfig{}), ValidationError);
  std::vector<AttackExample> single = {{{1, 2}, 1}};
  EXPECT_THROW(train(single, TrainConfig{}), ValidationError);
  std::vector<AttackExample> ragged = {{{1, 2}, 1}, {{2}, 0}};
  EXPECT_THROW(train(ragged, TrainConfig{}), ValidationError);
  TrainConfig bad;
  bad.learning_rate = -1;
  EXPECT_THROW(validate(bad), ValidationError);
}

}  // namespace
}  // namespace miaudit
