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

#include "miaudit/feature_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "json.hpp"
#include "miaudit/error.hpp"

namespace miaudit {

namespace {

using json = nlohmann::json;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_floats(std::vector<unsigned char>& out, std::span<const float> values) {
  for (float f : values) put_u32(out, std::bit_cast<std::uint32_t>(f));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

const char* kKnownKeys[] = {"dataset", "model", "created_utc"};

json sidecar_json(const FeatureSet& set) {
  json j;
  json extra = json::object();
  for (const char* key : kKnownKeys) j[key] = nullptr;
  for (const auto& [key, value] : set.meta()) {
    bool known = false;
    for (const char* k : kKnownKeys) known = known || key == k;
    if (known) {
      j[key] = value;
    } else {
      extra[key] = value;
    }
  }
  j["transforms"] = set.transform_names();
  j["extra"] = extra;
  return j;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".meta.json";
  return p;
}

void write_feature_set(const FeatureSet& set, const std::filesystem::path& path) {
  const std::uint32_t k = set.k_transforms();
  const MiafHeader header{kMiafVersion, set.d_img(), set.d_txt(), k, set.size()};

  std::vector<unsigned char> bytes;
  bytes.reserve(kMiafHeaderBytes + header.record_bytes() * set.size());
  bytes.insert(bytes.end(), kMiafMagic, kMiafMagic + 4);
  put_u32(bytes, header.version);
  put_u32(bytes, header.d_img);
  put_u32(bytes, header.d_txt);
  put_u32(bytes, header.k_transforms);
  put_u64(bytes, header.n_records);
  for (const FeatureRecord& r : set.records()) {
    put_u64(bytes, r.id);
    bytes.push_back(static_cast<unsigned char>(r.tag));
    put_floats(bytes, r.img.values());
    put_floats(bytes, r.txt.values());
    for (const EmbeddingVec& t : r.transformed) put_floats(bytes, t.values());
  }

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }
  {
    std::ofstream side(sidecar_path(path), std::ios::trunc);
    if (!side) throw IoError("cannot open sidecar for " + path.string());
    side << sidecar_json(set).dump(2) << '\n';
    if (!side) throw IoError("sidecar write failed: " + path.string());
  }
}

MiafReader::MiafReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path.string());
  unsigned char raw[kMiafHeaderBytes];
  in_.read(reinterpret_cast<char*>(raw), kMiafHeaderBytes);
  if (in_.gcount() >= 4 && std::memcmp(raw, kMiafMagic, 4) != 0) {
    throw DecodeError("magic mismatch: not a MIAF file");
  }
  if (in_.gcount() != static_cast<std::streamsize>(kMiafHeaderBytes)) {
    throw DecodeError("truncated header");
  }
  header_.version = get_u32(raw + 4);
  if (header_.version != kMiafVersion) {
    throw DecodeError("unsupported MIAF version " + std::to_string(header_.version));
  }
  header_.d_img = get_u32(raw + 8);
  header_.d_txt = get_u32(raw + 12);
  header_.k_transforms = get_u32(raw + 16);
  header_.n_records = get_u64(raw + 20);
  if (header_.d_img == 0 || header_.d_txt == 0) throw DecodeError("header dims must be positive");
  buffer_.resize(header_.record_bytes());
}

std::optional<FeatureRecord> MiafReader::next() {
  if (index_ == header_.n_records) {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw DecodeError("trailing bytes after last record", index_);
    }
    return std::nullopt;
  }
  in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
  if (in_.gcount() != static_cast<std::streamsize>(buffer_.size())) {
    throw DecodeError("truncated payload at record " + std::to_string(index_), index_);
  }
  const unsigned char* p = buffer_.data();
  FeatureRecord r;
  r.id = get_u64(p);
  p += 8;
  const auto tag = tag_from_byte(*p++);
  if (!tag) throw DecodeError("invalid tag byte at record " + std::to_string(index_), index_);
  r.tag = *tag;
  auto read_vec = [&](std::uint32_t dim) {
    std::vector<float> v(dim);
    for (std::uint32_t i = 0; i < dim; ++i, p += 4) {
      v[i] = std::bit_cast<float>(get_u32(p));
      if (!std::isfinite(v[i])) {
        throw DecodeError("non-finite float at record " + std::to_string(index_), index_);
      }
    }
    return EmbeddingVec::adopt(std::move(v));
  };
  r.img = read_vec(header_.d_img);
  r.txt = read_vec(header_.d_txt);
  r.transformed.reserve(header_.k_transforms);
  for (std::uint32_t k = 0; k < header_.k_transforms; ++k) r.transformed.push_back(read_vec(header_.d_img));
  ++index_;
  return r;
}

FeatureSet read_feature_set(const std::filesystem::path& path) {
  MiafReader reader(path);
  const MiafHeader& h = reader.header();

  FeatureSchema schema{h.d_img, h.d_txt, {}};
  MetaMap meta;
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    json j;
    try {
      j = json::parse(in);
      for (const char* key : kKnownKeys) {
        if (j.contains(key) && !j[key].is_null()) meta[key] = j[key].get<std::string>();
      }
      if (j.contains("extra")) {
        for (const auto& [key, value] : j["extra"].items()) meta[key] = value.get<std::string>();
      }
      schema.transform_names = j.at("transforms").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw DecodeError("malformed sidecar " + side.string() + ": " + e.what());
    }
    if (schema.transform_names.size() != h.k_transforms) {
      throw DecodeError("sidecar lists " + std::to_string(schema.transform_names.size()) +
                        " transforms but header declares " + std::to_string(h.k_transforms));
    }
  } else {
    for (std::uint32_t k = 0; k < h.k_transforms; ++k) schema.transform_names.push_back("t" + std::to_string(k));
  }

  std::vector<FeatureRecord> records;
  records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(h.n_records, 1u << 24)));
  while (auto r = reader.next()) records.push_back(std::move(*r));
  try {
    return FeatureSet(std::move(schema), std::move(records), std::move(meta));
  } catch (const ValidationError& e) {
    throw DecodeError(std::string("decoded set is invalid: ") + e.what());
  }
}

}  // namespace miaudit
