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

#ifndef MIAUDIT_METRICS_HPP_
#define MIAUDIT_METRICS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace miaudit {

struct LabeledScore {
  double score = 0.0;
  bool is_member = false;
};

using LabeledScores = std::vector<LabeledScore>;

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the first point
};

struct OperatingPoint {
  double tpr = 0.0;
  double threshold = 0.0;
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

struct AccuracyResult {
  double acc = 0.0;
  Confusion confusion;
};

// Mann-Whitney AUC: the fraction of (member, non-member) pairs ordered
// correctly, ties counted as one half. Throws ValidationError unless both
// classes are present.
double auc(std::span<const LabeledScore> data);

// Thresholds are +inf followed by the distinct scores in descending order; a
// sample is predicted member iff score >= threshold. Starts at (0,0), ends at
// (1,1); its trapezoid area equals auc().
std::vector<RocPoint> roc_curve(std::span<const LabeledScore> data);

double trapezoid_area(std::span<const RocPoint> curve);

// Highest TPR among operating points whose empirical FPR does not exceed
// `target_fpr`. No interpolation: the returned threshold is achievable.
OperatingPoint tpr_at_fpr(std::span<const LabeledScore> data, double target_fpr);

// Predict member iff score >= cutoff.
AccuracyResult accuracy(std::span<const LabeledScore> data, double cutoff = 0.5);

struct EvalReport {
  double auc = 0.0;
  std::map<double, OperatingPoint> tpr_at_fpr;
  std::optional<double> acc;
  std::optional<Confusion> confusion;
  std::vector<RocPoint> roc_points;
  std::map<std::string, std::string> extra;  // attack name, runtime, counts
};

struct EvalOptions {
  std::vector<double> fpr_targets = {0.01};
  std::optional<double> cutoff = 0.5;  // nullopt: skip accuracy/confusion
};

EvalReport evaluate(std::span<const LabeledScore> data, const EvalOptions& options = {});

// Key/value header followed by a `fpr,tpr,threshold` CSV block.
std::string format_report(const EvalReport& report);
void write_report(const std::filesystem::path& path, const EvalReport& report);
void write_roc_csv(const std::filesystem::path& path, std::span<const RocPoint> curve);

}  // namespace miaudit

#endif  // MIAUDIT_METRICS_HPP_
