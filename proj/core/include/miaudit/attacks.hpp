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

#ifndef MIAUDIT_ATTACKS_HPP_
#define MIAUDIT_ATTACKS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miaudit/attack_net.hpp"
#include "miaudit/metrics.hpp"
#include "miaudit/similarity.hpp"
#include "miaudit/types.hpp"

namespace miaudit {

// Gaussian summary of cosine similarities over known non-members.
struct NonMemberStats {
  double mu_no = 0.0;
  double sigma_no = 0.0;  // sample standard deviation, n - 1 denominator
  std::size_t n = 0;

  friend bool operator==(const NonMemberStats&, const NonMemberStats&) = default;
};

enum class PseudoStrategy : std::uint8_t {
  kThreshold = 0,  // CS >= mu_no + lambda * sigma_no
  kRandom = 1,     // random_count records drawn uniformly from the pool
};

struct WsaConfig {
  double lambda = 0.5;
  PseudoStrategy strategy = PseudoStrategy::kThreshold;
  std::optional<std::size_t> random_count;
  bool balance = true;
  std::uint64_t seed = 0;

  friend bool operator==(const WsaConfig&, const WsaConfig&) = default;
};

// Cosine-similarity attack: score = CS(img, txt).
ScoreVector csa_scores(const FeatureSet& set, unsigned threads = 1);

// Augmentation-enhanced attack: CS plus the summed per-transform CS drops.
// Throws ConfigError when the set has no transform channels.
ScoreVector aea_scores(const FeatureSet& set, unsigned threads = 1);

// Sample mean and n-1 standard deviation. Throws ValidationError for fewer
// than two scores.
NonMemberStats fit_nonmember_stats(std::span<const double> cs_no);

// Threshold strategy: records of `all` with CS >= mu_no + lambda * sigma_no,
// in input order. Random strategy: random_count records drawn without
// replacement by cfg.seed, in input order. Throws EmptySelectionError when
// the threshold selects nothing and ValidationError for an empty pool, a
// missing random_count, or random_count > |all|.
FeatureSet select_pseudo_members(const FeatureSet& all, const std::optional<NonMemberStats>& stats,
                                 const WsaConfig& cfg);

// Per-modality L2 normalized img followed by txt.
std::vector<double> attack_features(const FeatureRecord& record);

// Non-members labelled 0 followed by pseudo-members labelled 1, both in input
// order. With cfg.balance the larger class is down-sampled by cfg.seed to the
// size of the smaller. Throws ValidationError listing overlapping ids.
std::vector<AttackExample> build_attack_dataset(const FeatureSet& no, const FeatureSet& pseudo,
                                                const WsaConfig& cfg);

struct WsaResult {
  AttackNet net;
  NonMemberStats stats;
  std::size_t pseudo_count = 0;
  std::optional<double> mislabel_ratio;  // share of pseudo-members tagged non-member, when tags are known
  std::vector<EpochStats> training_log;
};

// batch_cs(no_train) -> fit_nonmember_stats -> select_pseudo_members(all)
// -> build_attack_dataset -> train.
WsaResult wsa_attack(const FeatureSet& no_train, const FeatureSet& all, const WsaConfig& cfg,
                     const TrainConfig& train_cfg,
                     std::span<const std::size_t> hidden_dims = kDefaultHiddenDims);

// Member probability per record. Throws DomainError if the net's input dim
// differs from d_img + d_txt.
ScoreVector wsa_scores(const AttackNet& net, const FeatureSet& set);

// MIAN snapshot: "MIAN" | version u32 | n_layers u32 | (n_layers + 1) dims u32
// | flat f64 parameters (per layer: weight row-major, then bias)
// | mu_no f64 | sigma_no f64 | n u64
// | lambda f64 | strategy u8 | random_count u64 (0 = unset) | balance u8 | seed u64
inline constexpr std::uint32_t kMianVersion = 1;

struct WsaSnapshot {
  AttackNet net;
  NonMemberStats stats;
  WsaConfig config;
};

void save_wsa_snapshot(const std::filesystem::path& path, const WsaSnapshot& snapshot);
WsaSnapshot load_wsa_snapshot(const std::filesystem::path& path);

// Pairs scores with membership tags. Throws ValidationError if a record is
// tagged Unknown or lengths differ.
LabeledScores label_scores(const FeatureSet& set, const ScoreVector& scores);

// `id,score,tag` CSV.
void write_attack_csv(const std::filesystem::path& path, const FeatureSet& set, const ScoreVector& scores);

std::string to_string(PseudoStrategy strategy);

}  // namespace miaudit

#endif  // MIAUDIT_ATTACKS_HPP_
