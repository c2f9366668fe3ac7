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

#include "miaudit/split.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "miaudit/error.hpp"
#include "miaudit/rng.hpp"

namespace miaudit {

std::vector<FeatureSet> split_disjoint(const FeatureSet& set, std::span<const double> fractions,
                                       std::uint64_t seed) {
  if (set.empty()) throw ValidationError("split_disjoint: empty feature set");
  if (fractions.empty()) throw ValidationError("split_disjoint: no fractions given");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0) || !std::isfinite(f)) throw ValidationError("split_disjoint: fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("split_disjoint: fractions must sum to 1");

  const std::size_t n = set.size();
  Rng rng(derive_seed(seed, {0x5b117ULL}));
  const std::vector<std::size_t> perm = rng.permutation(n);

  std::vector<FeatureSet> parts;
  parts.reserve(fractions.size());
  std::size_t start = 0;
  for (std::size_t p = 0; p < fractions.size(); ++p) {
    std::size_t count = static_cast<std::size_t>(std::floor(fractions[p] * static_cast<double>(n)));
    count = std::min(count, n - start);
    if (p + 1 == fractions.size()) count = n - start;
    std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(start),
                                 perm.begin() + static_cast<std::ptrdiff_t>(start + count));
    std::sort(idx.begin(), idx.end());
    parts.push_back(set.subset(idx));
    start += count;
  }
  return parts;
}

std::vector<DisjointViolation> assert_disjoint(std::span<const FeatureSet> sets) {
  std::vector<std::unordered_set<std::uint64_t>> ids(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (const FeatureRecord& r : sets[i].records()) ids[i].insert(r.id);
  }
  std::vector<DisjointViolation> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      std::vector<std::uint64_t> shared;
      for (const FeatureRecord& r : sets[i].records()) {
        if (ids[j].count(r.id)) shared.push_back(r.id);
      }
      std::sort(shared.begin(), shared.end());
      shared.erase(std::unique(shared.begin(), shared.end()), shared.end());
      for (std::uint64_t id : shared) out.push_back({i, j, id});
    }
  }
  return out;
}

}  // namespace miaudit
