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

#ifndef MIAUDIT_SPLIT_HPP_
#define MIAUDIT_SPLIT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "miaudit/types.hpp"

namespace miaudit {

// Partitions `set` into id-disjoint parts. Part i receives floor(f_i * n)
// records and the last part additionally receives the remainder. Records are
// assigned from a seeded permutation; each part keeps the input order.
// Throws ValidationError for an empty set, non-positive fractions, or
// fractions not summing to 1 within 1e-9.
std::vector<FeatureSet> split_disjoint(const FeatureSet& set, std::span<const double> fractions,
                                       std::uint64_t seed);

// Pairwise id collision between two sets of a list.
struct DisjointViolation {
  std::size_t set_a = 0;
  std::size_t set_b = 0;
  std::uint64_t id = 0;

  friend bool operator==(const DisjointViolation&, const DisjointViolation&) = default;
};

// Empty result iff the sets are pairwise id-disjoint; otherwise every
// (i, j, id) collision with i < j, ordered by (i, j, id).
std::vector<DisjointViolation> assert_disjoint(std::span<const FeatureSet> sets);

}  // namespace miaudit

#endif  // MIAUDIT_SPLIT_HPP_
