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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "miaudit/error.hpp"

namespace miaudit {

namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts count_classes(std::span<const LabeledScore> data) {
  ClassCounts c;
  for (const LabeledScore& s : data) (s.is_member ? c.pos : c.neg)++;
  return c;
}

ClassCounts require_both(std::span<const LabeledScore> data, const char* op) {
  const ClassCounts c = count_classes(data);
  if (c.pos == 0 || c.neg == 0) {
    throw ValidationError(std::string(op) + ": needs at least one member and one non-member");
  }
  for (const LabeledScore& s : data) {
    if (std::isnan(s.score)) throw ValidationError(std::string(op) + ": NaN score");
  }
  return c;
}

// Indices sorted by score descending.
std::vector<std::size_t> descending_order(std::span<const LabeledScore> data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data[a].score > data[b].score; });
  return order;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double auc(std::span<const LabeledScore> data) {
  const ClassCounts c = require_both(data, "auc");
  // Sweep score groups in ascending order; each member scores against the
  // non-members strictly below it plus half of those tied with it.
  std::vector<std::size_t> order = descending_order(data);
  std::reverse(order.begin(), order.end());
  double wins = 0.0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_here = 0, neg_here = 0;
    while (j < order.size() && data[order[j]].score == data[order[i]].score) {
      (data[order[j]].is_member ? pos_here : neg_here)++;
      ++j;
    }
    wins += static_cast<double>(pos_here) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg_here));
    neg_below += neg_here;
    i = j;
  }
  return wins / (static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

std::vector<RocPoint> roc_curve(std::span<const LabeledScore> data) {
  const ClassCounts c = require_both(data, "roc_curve");
  const std::vector<std::size_t> order = descending_order(data);
  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = data[order[i]].score;
    while (i < order.size() && data[order[i]].score == t) {
      (data[order[i]].is_member ? tp : fp)++;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(c.neg),
                     static_cast<double>(tp) / static_cast<double>(c.pos), t});
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

OperatingPoint tpr_at_fpr(std::span<const LabeledScore> data, double target_fpr) {
  if (!(target_fpr >= 0.0 && target_fpr < 1.0)) throw ValidationError("tpr_at_fpr: target must be in [0, 1)");
  const ClassCounts c = require_both(data, "tpr_at_fpr");
  // Largest false-positive count allowed; the epsilon absorbs representation
  // error in products such as 0.01 * 100.
  const double max_fp = std::floor(target_fpr * static_cast<double>(c.neg) + 1e-9);
  const std::vector<RocPoint> curve = roc_curve(data);
  OperatingPoint best{0.0, std::numeric_limits<double>::infinity()};
  for (const RocPoint& p : curve) {
    const double fp = std::round(p.fpr * static_cast<double>(c.neg));
    if (fp > max_fp) break;  // fpr is non-decreasing along the curve
    if (p.tpr > best.tpr) best = {p.tpr, p.threshold};
  }
  return best;
}

AccuracyResult accuracy(std::span<const LabeledScore> data, double cutoff) {
  if (data.empty()) throw ValidationError("accuracy: empty data");
  AccuracyResult r;
  for (const LabeledScore& s : data) {
    const bool predicted = s.score >= cutoff;
    if (predicted && s.is_member) ++r.confusion.tp;
    if (predicted && !s.is_member) ++r.confusion.fp;
    if (!predicted && !s.is_member) ++r.confusion.tn;
    if (!predicted && s.is_member) ++r.confusion.fn;
  }
  r.acc = static_cast<double>(r.confusion.tp + r.confusion.tn) / static_cast<double>(data.size());
  return r;
}

EvalReport evaluate(std::span<const LabeledScore> data, const EvalOptions& options) {
  EvalReport report;
  report.auc = auc(data);
  report.roc_points = roc_curve(data);
  for (double target : options.fpr_targets) report.tpr_at_fpr[target] = tpr_at_fpr(data, target);
  if (options.cutoff) {
    const AccuracyResult a = accuracy(data, *options.cutoff);
    report.acc = a.acc;
    report.confusion = a.confusion;
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  os << "auc=" << fmt(report.auc) << '\n';
  for (const auto& [target, op] : report.tpr_at_fpr) {
    os << "tpr_at_fpr[" << fmt(target) << "]=" << fmt(op.tpr) << '\n';
    os << "threshold_at_fpr[" << fmt(target) << "]=" << fmt(op.threshold) << '\n';
  }
  if (report.acc) os << "acc=" << fmt(*report.acc) << '\n';
  if (report.confusion) {
    os << "tp=" << report.confusion->tp << "\nfp=" << report.confusion->fp << "\ntn=" << report.confusion->tn
       << "\nfn=" << report.confusion->fn << '\n';
  }
  for (const auto& [key, value] : report.extra) os << key << '=' << value << '\n';
  os << "[roc_points]\nfpr,tpr,threshold\n";
  for (const RocPoint& p : report.roc_points) os << fmt(p.fpr) << ',' << fmt(p.tpr) << ',' << fmt(p.threshold) << '\n';
  return os.str();
}

void write_report(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << format_report(report);
  if (!out) throw IoError("write failed: " + path.string());
}

void write_roc_csv(const std::filesystem::path& path, std::span<const RocPoint> curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "fpr,tpr,threshold\n";
  for (const RocPoint& p : curve) out << fmt(p.fpr) << ',' << fmt(p.tpr) << ',' << fmt(p.threshold) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace miaudit
