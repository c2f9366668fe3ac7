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

#include "miaudit/ingest.hpp"

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <fstream>
#include "json.hpp"
#include <unordered_map>
#include <unordered_set>

#include "miaudit/error.hpp"

namespace miaudit {

namespace {

constexpr std::array<std::string_view, 50> kStopwords = {
    "a",    "an",   "the",   "and",   "or",    "but",  "of",    "to",   "in",   "on",
    "at",   "by",   "for",   "with",  "from",  "as",   "is",    "are",  "was",  "were",
    "be",   "been", "it",    "its",   "this",  "that", "these", "those", "he",  "she",
    "they", "we",   "you",   "i",     "his",   "her",  "their", "our",  "your", "my",
    "not",  "no",   "so",    "if",    "then",  "than", "there", "here", "into", "over",
};

bool is_punctuation(UChar32 c) {
  switch (u_charType(c)) {
    case U_CONNECTOR_PUNCTUATION:
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
      return true;
    default:
      return false;
  }
}

icu::UnicodeString filter(const icu::UnicodeString& in, bool (*drop)(UChar32)) {
  icu::UnicodeString out;
  for (int32_t i = 0; i < in.length();) {
    const UChar32 c = in.char32At(i);
    if (!drop(c)) out.append(c);
    i = in.moveIndex32(i, 1);
  }
  return out;
}

std::vector<icu::UnicodeString> tokens(const icu::UnicodeString& in) {
  std::vector<icu::UnicodeString> out;
  icu::UnicodeString cur;
  for (int32_t i = 0; i < in.length();) {
    const UChar32 c = in.char32At(i);
    if (u_isUWhiteSpace(c)) {
      if (!cur.isEmpty()) out.push_back(cur);
      cur.remove();
    } else {
      cur.append(c);
    }
    i = in.moveIndex32(i, 1);
  }
  if (!cur.isEmpty()) out.push_back(cur);
  return out;
}

icu::UnicodeString join(const std::vector<icu::UnicodeString>& parts) {
  icu::UnicodeString out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(static_cast<UChar>(u' '));
    out.append(parts[i]);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  std::size_t b = 0, e = s.size();
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::span<const std::string_view> stopwords() { return kStopwords; }

std::string normalize_caption(std::string_view text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s = join(tokens(s));                                                            // 1
  s.toLower(icu::Locale::getRoot());                                              // 2
  s = filter(s, [](UChar32 c) { return u_charType(c) == U_DECIMAL_DIGIT_NUMBER; });  // 3
  s = filter(s, is_punctuation);                                                  // 4
  std::vector<icu::UnicodeString> kept;                                           // 5
  for (const icu::UnicodeString& tok : tokens(s)) {
    std::string utf8;
    tok.toUTF8String(utf8);
    if (std::find(kStopwords.begin(), kStopwords.end(), utf8) == kStopwords.end()) kept.push_back(tok);
  }
  std::string out;
  join(kept).toUTF8String(out);
  return out;
}

std::string normalize_image_ref(std::string_view ref) {
  std::string s = trim(ref);
  const std::size_t sep = s.find("://");
  if (sep == std::string::npos) return s;
  std::size_t end = s.find_first_of("/?#", sep + 3);
  if (end == std::string::npos) end = s.size();
  std::transform(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(end), s.begin(),
                 [](unsigned char c) { return static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c); });
  return s;
}

DedupResult dedup(std::span<const ManifestEntry> a, std::span<const ManifestEntry> b) {
  std::unordered_set<std::string> captions, urls;
  for (const ManifestEntry& e : b) {
    std::string c = normalize_caption(e.caption);
    if (!c.empty()) captions.insert(std::move(c));
    urls.insert(normalize_image_ref(e.image_ref));
  }
  DedupResult out;
  for (const ManifestEntry& e : a) {
    const std::string c = normalize_caption(e.caption);
    if (!c.empty() && captions.count(c)) {
      out.removed.push_back({e.id, "caption", c});
      continue;
    }
    const std::string u = normalize_image_ref(e.image_ref);
    if (urls.count(u)) {
      out.removed.push_back({e.id, "url", u});
      continue;
    }
    out.kept.push_back(e);
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
    if (!j.contains("id") || !j["id"].is_number_unsigned()) {
      throw ValidationError(where + ": missing or non-integer \"id\"");
    }
    if (!j.contains("image") || !j["image"].is_string()) throw ValidationError(where + ": missing string \"image\"");
    if (!j.contains("caption") || !j["caption"].is_string()) {
      throw ValidationError(where + ": missing string \"caption\"");
    }
    ManifestEntry e{j["id"].get<std::uint64_t>(), j["image"].get<std::string>(), j["caption"].get<std::string>()};
    if (auto [it, fresh] = seen.emplace(e.id, line_no); !fresh) {
      throw ValidationError(where + ": duplicate id " + std::to_string(e.id) + " (first on line " +
                            std::to_string(it->second) + ")");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  for (const ManifestEntry& e : entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["image"] = e.image_ref;
    j["caption"] = e.caption;
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_dedup_report(const std::filesystem::path& path, std::span<const DedupRemoval> removed) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "id,reason,matched_key\n";
  for (const DedupRemoval& r : removed) out << r.id << ',' << r.reason << ',' << csv_field(r.matched_key) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace miaudit
