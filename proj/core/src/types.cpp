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

#include "miaudit/types.hpp"

#include <cmath>
#include <unordered_set>

#include "miaudit/error.hpp"

namespace miaudit {

EmbeddingVec::EmbeddingVec(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("embedding must have dim >= 1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("embedding component " + std::to_string(i) + " is not finite");
    }
  }
}

EmbeddingVec EmbeddingVec::adopt(std::vector<float> values) {
  EmbeddingVec v;
  v.values_ = std::move(values);
  return v;
}

std::string_view to_string(MembershipTag tag) {
  switch (tag) {
    case MembershipTag::kUnknown:
      return "unknown";
    case MembershipTag::kMember:
      return "member";
    case MembershipTag::kNonMember:
      return "nonmember";
  }
  return "unknown";
}

std::optional<MembershipTag> tag_from_byte(std::uint8_t byte) {
  if (byte > 2) return std::nullopt;
  return static_cast<MembershipTag>(byte);
}

std::optional<MembershipTag> parse_tag(std::string_view text) {
  if (text == "unknown" || text == "0") return MembershipTag::kUnknown;
  if (text == "member" || text == "1") return MembershipTag::kMember;
  if (text == "nonmember" || text == "2") return MembershipTag::kNonMember;
  return std::nullopt;
}

FeatureSet::FeatureSet(FeatureSchema schema, std::vector<FeatureRecord> records, MetaMap meta)
    : schema_(std::move(schema)), records_(std::move(records)), meta_(std::move(meta)) {
  if (schema_.d_img == 0 || schema_.d_txt == 0) {
    throw ValidationError("feature set dims must be positive");
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const FeatureRecord& r = records_[i];
    const std::string where = "record " + std::to_string(i) + " (id " + std::to_string(r.id) + ")";
    if (r.img.dim() != schema_.d_img) throw ValidationError(where + ": image dim mismatch");
    if (r.txt.dim() != schema_.d_txt) throw ValidationError(where + ": text dim mismatch");
    if (r.transformed.size() != schema_.k_transforms()) {
      throw ValidationError(where + ": expected " + std::to_string(schema_.k_transforms()) +
                            " transformed channels, got " + std::to_string(r.transformed.size()));
    }
    for (const EmbeddingVec& t : r.transformed) {
      if (t.dim() != schema_.d_img) throw ValidationError(where + ": transformed channel dim mismatch");
    }
    if (!seen.insert(r.id).second) throw ValidationError(where + ": duplicate id");
  }
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> indices) const {
  std::vector<FeatureRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(records_.at(i));
  return FeatureSet(schema_, std::move(out), meta_);
}

FeatureSet FeatureSet::with_tag(MembershipTag tag) const {
  FeatureSet copy = *this;
  for (FeatureRecord& r : copy.records_) r.tag = tag;
  return copy;
}

FeatureSet FeatureSet::with_meta(MetaMap meta) const {
  FeatureSet copy = *this;
  copy.meta_ = std::move(meta);
  return copy;
}

FeatureSet concat(std::span<const FeatureSet> sets) {
  if (sets.empty()) throw ValidationError("concat needs at least one set");
  std::vector<FeatureRecord> records;
  for (const FeatureSet& s : sets) {
    if (!(s.schema() == sets.front().schema())) {
      throw ValidationError("concat: schema mismatch between feature sets");
    }
    records.insert(records.end(), s.records().begin(), s.records().end());
  }
  return FeatureSet(sets.front().schema(), std::move(records), sets.front().meta());
}

}  // namespace miaudit
