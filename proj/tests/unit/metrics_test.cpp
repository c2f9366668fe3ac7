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

#include "miaudit/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "miaudit/error.hpp"
#include "miaudit/rng.hpp"

namespace miaudit {
namespace {

LabeledScores make(std::initializer_list<double> members, std::initializer_list<double> nonmembers) {
  LabeledScores out;
  for (double s : members) out.push_back({s, true});
  for (double s : nonmembers) out.push_back({s, false});
  return out;
}

// O(n_m * n_n) pair counting.
double brute_force_auc(const LabeledScores& data) {
  double wins = 0.0, pairs = 0.0;
  for (const auto& m : data) {
    if (!m.is_member) continue;
    for (const auto& n : data) {
      if (n.is_member) continue;
      pairs += 1.0;
      if (m.score > n.score) wins += 1.0;
      else if (m.score == n.score) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Best TPR over every candidate threshold whose FPR stays within target.
double brute_force_tpr(const LabeledScores& data, double target) {
  std::vector<double> thresholds = {std::numeric_limits<double>::infinity()};
  for (const auto& d : data) thresholds.push_back(d.score);
  double n_m = 0, n_n = 0;
  for (const auto& d : data) (d.is_member ? n_m : n_n) += 1;
  double best = 0.0;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (const auto& d : data) {
      if (d.score >= t) (d.is_member ? tp : fp) += 1;
    }
    if (fp / n_n <= target) best = std::max(best, tp / n_m);
  }
  return best;
}

LabeledScores random_instance(Rng& rng, std::size_t n, bool coarse) {
  LabeledScores out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].is_member = i % 2 == 0 || rng.uniform() < 0.3;
    double s = rng.normal(out[i].is_member ? 0.4 : 0.0, 1.0);
    if (coarse) s = std::round(s * 4.0) / 4.0;  // plenty of ties
    out[i].score = s;
  }
  out[1].is_member = false;
  return out;
}

TEST(AucTest, ThreeOfFourPairs) {
  EXPECT_DOUBLE_EQ(auc(make({0.8, 0.3}, {0.5, 0.1})), 0.75);
}

TEST(AucTest, TiesCountHalf) {
  EXPECT_DOUBLE_EQ(auc(make({0.5}, {0.5})), 0.5);
  EXPECT_DOUBLE_EQ(auc(make({0.5, 0.5}, {0.5, 0.1})), 0.75);
}

TEST(AucTest, SingleClassThrows) {
  EXPECT_THROW(auc(make({0.1, 0.2}, {})), ValidationError);
  EXPECT_THROW(auc(make({}, {0.1})), ValidationError);
  EXPECT_THROW(auc(LabeledScores{}), ValidationError);
}

TEST(AucTest, MatchesPairCountingOnRandomInstances) {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const auto data = random_instance(rng, 2 + rng.below(300), trial % 2 == 0);
    const double expected = brute_force_auc(data);
    EXPECT_LT(std::abs(auc(data) - expected), 1e-12);
    EXPECT_LT(std::abs(trapezoid_area(roc_curve(data)) - expected), 1e-12);
  }
}

TEST(AucTest, FlippingLabelsComplements) {
  Rng rng(3);
  auto data = random_instance(rng, 200, true);
  const double a = auc(data);
  for (auto& d : data) d.is_member = !d.is_member;
  EXPECT_NEAR(auc(data), 1.0 - a, 1e-12);
}

TEST(RocCurveTest, FourPointExample) {
  const auto curve = roc_curve(make({0.8, 0.3}, {0.5, 0.1}));
  const std::vector<std::pair<double, double>> expected = {{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}};
  ASSERT_EQ(curve.size(), expected.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_DOUBLE_EQ(curve[i].fpr, expected[i].first) << i;
    EXPECT_DOUBLE_EQ(curve[i].tpr, expected[i].second) << i;
  }
  EXPECT_TRUE(std::isinf(curve[0].threshold));
  EXPECT_DOUBLE_EQ(curve[1].threshold, 0.8);
  EXPECT_DOUBLE_EQ(curve[4].threshold, 0.1);
}

TEST(RocCurveTest, PerfectSeparationPassesThroughCorner) {
  const auto curve = roc_curve(make({0.9, 0.8}, {0.2, 0.1}));
  bool corner = false;
  for (const auto& p : curve) corner |= (p.fpr == 0.0 && p.tpr == 1.0);
  EXPECT_TRUE(corner);
}

TEST(RocCurveTest, MonotoneAndEndpoints) {
  Rng rng(11);
  const auto curve = roc_curve(random_instance(rng, 500, true));
  EXPECT_EQ(curve.front().fpr, 0.0);
  EXPECT_EQ(curve.front().tpr, 0.0);
  EXPECT_EQ(curve.back().fpr, 1.0);
  EXPECT_EQ(curve.back().tpr, 1.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_GE(curve[i].fpr, curve[i - 1].fpr);
    EXPECT_GE(curve[i].tpr, curve[i - 1].tpr);
    if (i > 1) EXPECT_LT(curve[i].threshold, curve[i - 1].threshold);
  }
}

TEST(TprAtFprTest, ZeroTarget) {
  const auto op = tpr_at_fpr(make({0.9, 0.7, 0.4}, {0.8, 0.2, 0.1}), 0.0);
  EXPECT_DOUBLE_EQ(op.tpr, 1.0 / 3.0);
  EXPECT_GT(op.threshold, 0.8);
}

TEST(TprAtFprTest, PerfectSeparation) {
  EXPECT_DOUBLE_EQ(tpr_at_fpr(make({0.9, 0.8}, {0.2, 0.1}), 0.01).tpr, 1.0);
}

TEST(TprAtFprTest, MembersBelowEveryNonMember) {
  LabeledScores data;
  for (int i = 0; i < 200; ++i) data.push_back({1.0 + i, false});
  for (int i = 0; i < 50; ++i) data.push_back({-1.0 - i, true});
  EXPECT_EQ(tpr_at_fpr(data, 0.01).tpr, 0.0);
  // Now let a member climb into the top 1% tail: two non-members may be
  // misclassified at 1% of 200.
  data.push_back({199.5, true});
  EXPECT_DOUBLE_EQ(tpr_at_fpr(data, 0.01).tpr, brute_force_tpr(data, 0.01));
  EXPECT_GT(tpr_at_fpr(data, 0.01).tpr, 0.0);
}

TEST(TprAtFprTest, MatchesThresholdEnumeration) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto data = random_instance(rng, 50 + rng.below(400), trial % 3 == 0);
    for (double target : {0.0, 0.01, 0.1, 0.5}) {
      EXPECT_DOUBLE_EQ(tpr_at_fpr(data, target).tpr, brute_force_tpr(data, target)) << trial << " " << target;
    }
  }
}

TEST(TprAtFprTest, ThresholdIsAchievable) {
  Rng rng(9);
  const auto data = random_instance(rng, 300, false);
  const auto op = tpr_at_fpr(data, 0.05);
  double tp = 0, fp = 0, n_m = 0, n_n = 0;
  for (const auto& d : data) {
    (d.is_member ? n_m : n_n) += 1;
    if (d.score >= op.threshold) (d.is_member ? tp : fp) += 1;
  }
  EXPECT_DOUBLE_EQ(tp / n_m, op.tpr);
  EXPECT_LE(fp / n_n, 0.05);
}

TEST(AccuracyTest, AllCorrect) {
  const auto r = accuracy(make({0.9, 0.6}, {0.4, 0.1}), 0.5);
  EXPECT_DOUBLE_EQ(r.acc, 1.0);
  EXPECT_EQ(r.confusion.tp, 2u);
  EXPECT_EQ(r.confusion.tn, 2u);
}

TEST(AccuracyTest, ConstantScoreAtCutoffPredictsMember) {
  const auto r = accuracy(make({0.5, 0.5}, {0.5, 0.5}), 0.5);
  EXPECT_DOUBLE_EQ(r.acc, 0.5);
  EXPECT_EQ(r.confusion.tp, 2u);
  EXPECT_EQ(r.confusion.fp, 2u);
}

TEST(AccuracyTest, ConfusionSumsToN) {
  Rng rng(1);
  const auto data = random_instance(rng, 137, false);
  EXPECT_EQ(accuracy(data, 0.1).confusion.total(), data.size());
}

TEST(EvaluateTest, ReportCarriesRequestedTargets) {
  EvalOptions opts;
  opts.fpr_targets = {0.0, 0.01, 0.1};
  const auto report = evaluate(make({0.8, 0.3}, {0.5, 0.1}), opts);
  EXPECT_DOUBLE_EQ(report.auc, 0.75);
  EXPECT_EQ(report.tpr_at_fpr.size(), 3u);
  ASSERT_TRUE(report.acc.has_value());
  EXPECT_EQ(report.roc_points.size(), 5u);

  opts.cutoff.reset();
  const auto no_acc = evaluate(make({0.8, 0.3}, {0.5, 0.1}), opts);
  EXPECT_FALSE(no_acc.acc.has_value());
  EXPECT_FALSE(no_acc.confusion.has_value());
}

TEST(EvaluateTest, FormattedReportMentionsAuc) {
  const auto text = format_report(evaluate(make({0.8, 0.3}, {0.5, 0.1})));
  EXPECT_NE(text.find("auc"), std::string::npos);
  EXPECT_NE(text.find("fpr,tpr,threshold"), std::string::npos);
}

}  // namespace
}  // namespace miaudit
