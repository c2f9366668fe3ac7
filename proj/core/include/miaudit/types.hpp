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

#ifndef MIAUDIT_TYPES_HPP_
#define MIAUDIT_TYPES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace miaudit {

// One embedding produced by an encoder tower. Components are stored as 32-bit
// floats; every consumer computes in double precision.
class EmbeddingVec {
 public:
  EmbeddingVec() = default;

  // Throws ValidationError on empty input or non-finite components.
  explicit EmbeddingVec(std::vector<float> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  // Unchecked construction for decoders that already validated the payload.
  static EmbeddingVec adopt(std::vector<float> values);

  friend bool operator==(const EmbeddingVec&, const EmbeddingVec&) = default;

 private:
  std::vector<float> values_;
};

enum class MembershipTag : std::uint8_t {
  kUnknown = 0,
  kMember = 1,
  kNonMember = 2,
};

std::string_view to_string(MembershipTag tag);
std::optional<MembershipTag> tag_from_byte(std::uint8_t byte);
// Accepts "unknown", "member", "nonmember" (case-sensitive) or the wire byte.
std::optional<MembershipTag> parse_tag(std::string_view text);

struct FeatureRecord {
  std::uint64_t id = 0;
  MembershipTag tag = MembershipTag::kUnknown;
  EmbeddingVec img;
  EmbeddingVec txt;
  std::vector<EmbeddingVec> transformed;  // f_img(T_k(x)), k = 0..K-1

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

// Dimensions and channel metadata shared by every record of a set.
struct FeatureSchema {
  std::uint32_t d_img = 0;
  std::uint32_t d_txt = 0;
  std::vector<std::string> transform_names;

  std::uint32_t k_transforms() const {
    return static_cast<std::uint32_t>(transform_names.size());
  }

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

using MetaMap = std::map<std::string, std::string>;

// Immutable, validated collection of feature records. Safe to share read-only
// across threads.
class FeatureSet {
 public:
  FeatureSet() = default;

  // Validates every invariant: positive dims, per-record conformance to the
  // schema, unique ids. Throws ValidationError naming the first offender.
  FeatureSet(FeatureSchema schema, std::vector<FeatureRecord> records, MetaMap meta = {});

  const FeatureSchema& schema() const { return schema_; }
  std::uint32_t d_img() const { return schema_.d_img; }
  std::uint32_t d_txt() const { return schema_.d_txt; }
  std::uint32_t k_transforms() const { return schema_.k_transforms(); }
  const std::vector<std::string>& transform_names() const { return schema_.transform_names; }

  const std::vector<FeatureRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const FeatureRecord& operator[](std::size_t i) const { return records_[i]; }

  const MetaMap& meta() const { return meta_; }

  // Returns a copy carrying only the records at `indices` (in that order).
  FeatureSet subset(std::span<const std::size_t> indices) const;

  // Returns a copy with every record's tag replaced.
  FeatureSet with_tag(MembershipTag tag) const;

  FeatureSet with_meta(MetaMap meta) const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  FeatureSchema schema_;
  std::vector<FeatureRecord> records_;
  MetaMap meta_;
};

// Concatenates sets with identical schemas. Meta is taken from the first set.
FeatureSet concat(std::span<const FeatureSet> sets);

// Black-box view of a two-tower model: raw image and text inputs in, feature
// vectors out. Implementations must be deterministic for fixed input.
template <typename ImageInput, typename TextInput>
class TargetModel {
 public:
  virtual ~TargetModel() = default;
  virtual EmbeddingVec embed_image(const ImageInput& image) const = 0;
  virtual EmbeddingVec embed_text(const TextInput& text) const = 0;
};

}  // namespace miaudit

#endif  // MIAUDIT_TYPES_HPP_
