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

#include "miaudit/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "miaudit/error.hpp"

namespace miaudit {

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DomainError("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_similarity: zero-norm input");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVec& a, const EmbeddingVec& b) {
  return cosine_similarity(a.values(), b.values());
}

double cs_gap(const FeatureRecord& record, std::size_t k) {
  if (k >= record.transformed.size()) {
    throw DomainError("cs_gap: channel " + std::to_string(k) + " out of range (K=" +
                      std::to_string(record.transformed.size()) + ")");
  }
  return cosine_similarity(record.img, record.txt) - cosine_similarity(record.transformed[k], record.txt);
}

double aea_aggregate(const FeatureRecord& record) {
  if (record.transformed.empty()) {
    throw ConfigError("augmentation score needs K >= 1 transformed channels; use the plain cosine attack");
  }
  const double cs = cosine_similarity(record.img, record.txt);
  double total = cs;
  for (const EmbeddingVec& t : record.transformed) total += cs - cosine_similarity(t, record.txt);
  return total;
}

ScoreVector batch_cs(const FeatureSet& set, unsigned threads) {
  ScoreVector out(set.size());
  detail::parallel_ranges(set.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const FeatureRecord& r = set[i];
      try {
        out[i] = cosine_similarity(r.img, r.txt);
      } catch (const DomainError& e) {
        throw DomainError(std::string(e.what()) + " (record id " + std::to_string(r.id) + ")");
      }
    }
  });
  return out;
}

void write_score_csv(const std::filesystem::path& path, const FeatureSet& set, const ScoreVector& scores) {
  if (scores.size() != set.size()) throw ValidationError("score vector length does not match feature set");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "id,score\n";
  char buf[64];
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", scores[i]);
    out << set[i].id << ',' << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace miaudit
