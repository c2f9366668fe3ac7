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

#include "miaudit/attacks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "miaudit/error.hpp"
#include "miaudit/rng.hpp"

namespace miaudit {

namespace {

constexpr char kMianMagic[4] = {'M', 'I', 'A', 'N'};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

  const unsigned char* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw DecodeError("truncated MIAN snapshot");
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint8_t u8() { return *take(1); }
  std::uint32_t u32() {
    const unsigned char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  std::uint64_t u64() {
    const unsigned char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_string(PseudoStrategy strategy) {
  return strategy == PseudoStrategy::kThreshold ? "threshold" : "random";
}

ScoreVector csa_scores(const FeatureSet& set, unsigned threads) {
  if (set.empty()) throw ValidationError("csa_scores: empty feature set");
  return batch_cs(set, threads);
}

ScoreVector aea_scores(const FeatureSet& set, unsigned threads) {
  if (set.k_transforms() == 0) {
    throw ConfigError("augmentation-enhanced attack needs transform channels (K >= 1); file has K = 0, use csa");
  }
  ScoreVector out(set.size());
  detail::parallel_ranges(set.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = aea_aggregate(set[i]);
  });
  return out;
}

NonMemberStats fit_nonmember_stats(std::span<const double> cs_no) {
  if (cs_no.size() < 2) throw ValidationError("fit_nonmember_stats: need at least 2 scores");
  double mean = 0.0;
  for (double v : cs_no) mean += v;
  mean /= static_cast<double>(cs_no.size());
  double ss = 0.0;
  for (double v : cs_no) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(cs_no.size() - 1)), cs_no.size()};
}

FeatureSet select_pseudo_members(const FeatureSet& all, const std::optional<NonMemberStats>& stats,
                                 const WsaConfig& cfg) {
  if (all.empty()) throw ValidationError("select_pseudo_members: empty candidate pool");
  std::vector<std::size_t> chosen;
  if (cfg.strategy == PseudoStrategy::kThreshold) {
    if (!stats) throw ValidationError("threshold pseudo-labeling needs non-member statistics");
    const double threshold = stats->mu_no + cfg.lambda * stats->sigma_no;
    const ScoreVector cs = batch_cs(all);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (cs[i] >= threshold) chosen.push_back(i);
    }
    if (chosen.empty()) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "no candidate reaches the pseudo-member threshold %.6f (mu_no=%.6f, sigma_no=%.6f, lambda=%g); "
                    "lower lambda or use the random strategy",
                    threshold, stats->mu_no, stats->sigma_no, cfg.lambda);
      throw EmptySelectionError(buf);
    }
  } else {
    if (!cfg.random_count || *cfg.random_count == 0) {
      throw ValidationError("random pseudo-labeling needs a positive random_count");
    }
    if (*cfg.random_count > all.size()) {
      throw ValidationError("random_count " + std::to_string(*cfg.random_count) + " exceeds pool size " +
                            std::to_string(all.size()));
    }
    Rng rng(derive_seed(cfg.seed, {0x9e0d0ULL}));
    chosen = rng.sample_without_replacement(all.size(), *cfg.random_count);
    std::sort(chosen.begin(), chosen.end());
  }
  return all.subset(chosen);
}

std::vector<double> attack_features(const FeatureRecord& record) {
  std::vector<double> out;
  out.reserve(record.img.dim() + record.txt.dim());
  for (const EmbeddingVec* v : {&record.img, &record.txt}) {
    double norm = 0.0;
    for (float x : v->values()) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw DomainError("zero-norm embedding in record " + std::to_string(record.id));
    for (float x : v->values()) out.push_back(x / norm);
  }
  return out;
}

std::vector<AttackExample> build_attack_dataset(const FeatureSet& no, const FeatureSet& pseudo,
                                                const WsaConfig& cfg) {
  std::unordered_set<std::uint64_t> no_ids;
  for (const FeatureRecord& r : no.records()) no_ids.insert(r.id);
  std::vector<std::uint64_t> overlap;
  for (const FeatureRecord& r : pseudo.records()) {
    if (no_ids.count(r.id)) overlap.push_back(r.id);
  }
  if (!overlap.empty()) {
    std::string ids;
    for (std::size_t i = 0; i < overlap.size() && i < 20; ++i) ids += (i ? "," : "") + std::to_string(overlap[i]);
    if (overlap.size() > 20) ids += ",...";
    throw ValidationError("non-member and pseudo-member sets share " + std::to_string(overlap.size()) +
                          " ids: " + ids);
  }

  std::vector<std::size_t> keep_no(no.size()), keep_pseudo(pseudo.size());
  for (std::size_t i = 0; i < no.size(); ++i) keep_no[i] = i;
  for (std::size_t i = 0; i < pseudo.size(); ++i) keep_pseudo[i] = i;
  if (cfg.balance && no.size() != pseudo.size()) {
    Rng rng(derive_seed(cfg.seed, {0xba1a9ceULL}));
    auto& larger = no.size() > pseudo.size() ? keep_no : keep_pseudo;
    const std::size_t target = std::min(no.size(), pseudo.size());
    larger = rng.sample_without_replacement(larger.size(), target);
    std::sort(larger.begin(), larger.end());
  }

  std::vector<AttackExample> out;
  out.reserve(keep_no.size() + keep_pseudo.size());
  for (std::size_t i : keep_no) out.push_back({attack_features(no[i]), 0});
  for (std::size_t i : keep_pseudo) out.push_back({attack_features(pseudo[i]), 1});
  return out;
}

WsaResult wsa_attack(const FeatureSet& no_train, const FeatureSet& all, const WsaConfig& cfg,
                     const TrainConfig& train_cfg, std::span<const std::size_t> hidden_dims) {
  if (no_train.size() < 2) throw ValidationError("wsa: need at least 2 known non-members");
  if (all.empty()) throw ValidationError("wsa: empty candidate pool");
  WsaResult result;
  std::optional<NonMemberStats> stats;
  const ScoreVector cs_no = batch_cs(no_train);
  result.stats = fit_nonmember_stats(cs_no);
  stats = result.stats;
  const FeatureSet pseudo = select_pseudo_members(all, stats, cfg);
  result.pseudo_count = pseudo.size();

  std::size_t tagged = 0, wrong = 0;
  for (const FeatureRecord& r : pseudo.records()) {
    if (r.tag == MembershipTag::kUnknown) continue;
    ++tagged;
    wrong += r.tag == MembershipTag::kNonMember;
  }
  if (tagged == pseudo.size() && tagged > 0) {
    result.mislabel_ratio = static_cast<double>(wrong) / static_cast<double>(tagged);
  }

  const std::vector<AttackExample> dataset = build_attack_dataset(no_train, pseudo, cfg);
  TrainResult trained = train(dataset, train_cfg, hidden_dims);
  result.net = std::move(trained.net);
  result.training_log = std::move(trained.log);
  return result;
}

ScoreVector wsa_scores(const AttackNet& net, const FeatureSet& set) {
  const std::size_t dim = static_cast<std::size_t>(set.d_img()) + set.d_txt();
  if (net.input_dim() != dim) {
    throw DomainError("attack net input dim " + std::to_string(net.input_dim()) +
                      " does not match d_img + d_txt = " + std::to_string(dim));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::vector<double> f = attack_features(set[i]);
    x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), static_cast<Eigen::Index>(dim));
  }
  const Eigen::VectorXd p = net.forward_batch(x);
  return ScoreVector(p.data(), p.data() + p.size());
}

void save_wsa_snapshot(const std::filesystem::path& path, const WsaSnapshot& s) {
  ByteWriter w;
  w.raw(kMianMagic, 4);
  w.u32(kMianVersion);
  const auto& dims = s.net.layer_dims();
  w.u32(static_cast<std::uint32_t>(dims.size() - 1));
  for (std::size_t d : dims) w.u32(static_cast<std::uint32_t>(d));
  for (double p : s.net.flat_parameters()) w.f64(p);
  w.f64(s.stats.mu_no);
  w.f64(s.stats.sigma_no);
  w.u64(s.stats.n);
  w.f64(s.config.lambda);
  w.u8(static_cast<std::uint8_t>(s.config.strategy));
  w.u64(s.config.random_count.value_or(0));
  w.u8(s.config.balance ? 1 : 0);
  w.u64(s.config.seed);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("write failed: " + path.string());
}

WsaSnapshot load_wsa_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(std::move(bytes));
  if (std::memcmp(r.take(4), kMianMagic, 4) != 0) throw DecodeError("magic mismatch: not a MIAN snapshot");
  const std::uint32_t version = r.u32();
  if (version != kMianVersion) throw DecodeError("unsupported MIAN version " + std::to_string(version));
  const std::uint32_t n_layers = r.u32();
  if (n_layers == 0 || n_layers > 64) throw DecodeError("implausible layer count in MIAN snapshot");
  std::vector<std::size_t> dims;
  for (std::uint32_t i = 0; i <= n_layers; ++i) dims.push_back(r.u32());

  WsaSnapshot s;
  try {
    s.net = AttackNet(dims);
  } catch (const ValidationError& e) {
    throw DecodeError(std::string("bad layer shapes in MIAN snapshot: ") + e.what());
  }
  std::vector<double> flat(s.net.parameter_count());
  for (double& p : flat) p = r.f64();
  s.net.set_flat_parameters(flat);
  if (!s.net.all_finite()) throw DecodeError("non-finite parameter in MIAN snapshot");
  s.stats.mu_no = r.f64();
  s.stats.sigma_no = r.f64();
  s.stats.n = r.u64();
  s.config.lambda = r.f64();
  const std::uint8_t strategy = r.u8();
  if (strategy > 1) throw DecodeError("bad pseudo strategy in MIAN snapshot");
  s.config.strategy = static_cast<PseudoStrategy>(strategy);
  const std::uint64_t count = r.u64();
  if (count) s.config.random_count = count;
  s.config.balance = r.u8() != 0;
  s.config.seed = r.u64();
  if (!r.done()) throw DecodeError("trailing bytes in MIAN snapshot");
  return s;
}

LabeledScores label_scores(const FeatureSet& set, const ScoreVector& scores) {
  if (scores.size() != set.size()) throw ValidationError("score vector length does not match feature set");
  LabeledScores out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const MembershipTag tag = set[i].tag;
    if (tag == MembershipTag::kUnknown) {
      throw ValidationError("record id " + std::to_string(set[i].id) + " has unknown membership; cannot evaluate");
    }
    out.push_back({scores[i], tag == MembershipTag::kMember});
  }
  return out;
}

void write_attack_csv(const std::filesystem::path& path, const FeatureSet& set, const ScoreVector& scores) {
  if (scores.size() != set.size()) throw ValidationError("score vector length does not match feature set");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "id,score,tag\n";
  char buf[64];
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", scores[i]);
    out << set[i].id << ',' << buf << ',' << to_string(set[i].tag) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace miaudit
