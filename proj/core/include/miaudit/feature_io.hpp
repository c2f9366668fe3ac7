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

#ifndef MIAUDIT_FEATURE_IO_HPP_
#define MIAUDIT_FEATURE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>

#include "miaudit/types.hpp"

namespace miaudit {

// MIAF: little-endian binary feature container.
//
//   header  : "MIAF" | version u32 | d_img u32 | d_txt u32 | k u32 | n u64
//   record  : id u64 | tag u8 | d_img f32 | d_txt f32 | k * d_img f32
//
// Transform names and free-form metadata live in a JSON sidecar at
// `<path>.meta.json` with keys dataset, model, transforms, created_utc and an
// `extra` object for any remaining meta entries.
inline constexpr char kMiafMagic[4] = {'M', 'I', 'A', 'F'};
inline constexpr std::uint32_t kMiafVersion = 1;
inline constexpr std::size_t kMiafHeaderBytes = 28;

struct MiafHeader {
  std::uint32_t version = kMiafVersion;
  std::uint32_t d_img = 0;
  std::uint32_t d_txt = 0;
  std::uint32_t k_transforms = 0;
  std::uint64_t n_records = 0;

  std::size_t record_bytes() const {
    return 8 + 1 + 4 * (static_cast<std::size_t>(d_img) * (1 + k_transforms) + d_txt);
  }
};

std::filesystem::path sidecar_path(const std::filesystem::path& path);

// Writes the binary file and its sidecar. Throws IoError on failure.
void write_feature_set(const FeatureSet& set, const std::filesystem::path& path);

// Reads a file and its sidecar (a missing sidecar yields default transform
// names "t0".."tK-1" and empty meta). Throws DecodeError on a bad magic,
// unsupported version, truncation, non-finite floats or trailing bytes.
FeatureSet read_feature_set(const std::filesystem::path& path);

// Record-at-a-time reader; holds at most one record in memory.
class MiafReader {
 public:
  explicit MiafReader(const std::filesystem::path& path);

  const MiafHeader& header() const { return header_; }

  // Next record, or nullopt after the last one. Throws DecodeError with the
  // record index on truncation or non-finite values.
  std::optional<FeatureRecord> next();

  std::uint64_t records_read() const { return index_; }

 private:
  std::ifstream in_;
  MiafHeader header_;
  std::uint64_t index_ = 0;
  std::vector<unsigned char> buffer_;
};

}  // namespace miaudit

#endif  // MIAUDIT_FEATURE_IO_HPP_
