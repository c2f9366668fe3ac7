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

#ifndef MIAUDIT_INGEST_HPP_
#define MIAUDIT_INGEST_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "miaudit/split.hpp"  // assert_disjoint

namespace miaudit {

struct ManifestEntry {
  std::uint64_t id = 0;
  std::string image_ref;  // URL or path
  std::string caption;    // UTF-8

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// The embedded stopword list, in the order documented in docs/stopwords.md.
std::span<const std::string_view> stopwords();

// Collapse whitespace and trim, lowercase, drop decimal digits, drop Unicode
// punctuation, drop stopwords; surviving tokens joined by single spaces.
// Invalid UTF-8 sequences are replaced by U+FFFD before processing.
std::string normalize_caption(std::string_view text);

// Trimmed ref with scheme and authority lowercased ("HTTP://Ex.COM/A" ->
// "http://ex.com/A"). Refs without "://" are only trimmed.
std::string normalize_image_ref(std::string_view ref);

struct DedupRemoval {
  std::uint64_t id = 0;
  std::string reason;  // "caption" or "url"
  std::string matched_key;
};

struct DedupResult {
  std::vector<ManifestEntry> kept;
  std::vector<DedupRemoval> removed;
};

// Removes entries of `a` whose normalized caption or normalized image ref
// occurs in `b`. Captions that normalize to "" never match. A caption match
// is reported in preference to a URL match.
DedupResult dedup(std::span<const ManifestEntry> a, std::span<const ManifestEntry> b);

// JSON Lines, one {"id", "image", "caption"} object per line. Blank lines
// are skipped. Throws ValidationError naming the line on malformed input or
// duplicate ids, IoError when the file cannot be read.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

// CSV `id,reason,matched_key` (RFC 4180 quoting).
void write_dedup_report(const std::filesystem::path& path, std::span<const DedupRemoval> removed);

}  // namespace miaudit

#endif  // MIAUDIT_INGEST_HPP_
