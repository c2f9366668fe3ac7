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

#ifndef MIAUDIT_SIMILARITY_HPP_
#define MIAUDIT_SIMILARITY_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "miaudit/types.hpp"

namespace miaudit {

// Per-record scores aligned with a FeatureSet's record order. Higher means
// more member-like for every attack in this library.
using ScoreVector = std::vector<double>;

// <a,b> / (|a||b|) accumulated in double and clamped to [-1, 1].
// Throws DomainError on dimension mismatch or a zero-norm argument.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(const EmbeddingVec& a, const EmbeddingVec& b);

// CS(img, txt) - CS(transformed[k], txt).
double cs_gap(const FeatureRecord& record, std::size_t k);

// CS(img, txt) + sum_k cs_gap(record, k). Throws ConfigError when the record
// has no transformed channels.
double aea_aggregate(const FeatureRecord& record);

// CS(img, txt) per record. `threads` > 1 splits the records into contiguous
// ranges; the result is identical to the sequential evaluation. DomainError
// messages name the offending record id.
ScoreVector batch_cs(const FeatureSet& set, unsigned threads = 1);

// `id,score` CSV, one row per record.
void write_score_csv(const std::filesystem::path& path, const FeatureSet& set, const ScoreVector& scores);

namespace detail {

// Runs fn(begin, end) over contiguous index ranges on up to `threads` workers.
template <typename Fn>
void parallel_ranges(std::size_t n, unsigned threads, Fn&& fn);

}  // namespace detail

}  // namespace miaudit

#include "miaudit/detail/parallel.hpp"

#endif  // MIAUDIT_SIMILARITY_HPP_
