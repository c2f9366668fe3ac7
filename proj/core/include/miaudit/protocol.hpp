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

#ifndef MIAUDIT_PROTOCOL_HPP_
#define MIAUDIT_PROTOCOL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "miaudit/attacks.hpp"
#include "miaudit/metrics.hpp"
#include "miaudit/types.hpp"

namespace miaudit {

// The three feature-set roles of an audit: the labeled evaluation set, the
// unlabeled pool D_all the attacker pseudo-labels, and the known non-members
// D_no. `no_pool` holds every record reserved for D_no so size sweeps can
// draw prefixes of it; `no_train` is the prefix in use.
struct Scenario {
  FeatureSet eval;
  FeatureSet all;
  FeatureSet no_pool;
  FeatureSet no_train;

  // Copy whose no_train is the first n records of no_pool.
  Scenario with_nonmember_train_size(std::size_t n) const;
};

struct ProtocolConfig {
  std::size_t eval_members = 1000;
  std::size_t eval_nonmembers = 1000;
  std::size_t all_members = 1000;
  std::size_t all_nonmembers = 1000;
  std::size_t nonmember_pool = 2000;
  std::size_t nonmember_train = 1000;
  std::uint64_t seed = 0;
};

void validate(const ProtocolConfig& cfg);

// Carves disjoint roles out of a member set and a non-member set using seeded
// permutations. Throws ValidationError when a set is too small for the
// requested sizes or the resulting roles collide on ids.
Scenario build_scenario(const FeatureSet& members, const FeatureSet& nonmembers, const ProtocolConfig& cfg);

enum class AttackKind { kCsa, kAea, kWsa };

std::string to_string(AttackKind kind);
std::optional<AttackKind> parse_attack_kind(const std::string& text);

struct AttackRecipe {
  AttackKind kind = AttackKind::kCsa;
  WsaConfig wsa;
  TrainConfig train;
  std::vector<std::size_t> hidden_dims = kDefaultHiddenDims;
  EvalOptions eval;
  unsigned threads = 1;
};

struct AttackOutcome {
  ScoreVector scores;  // aligned with scenario.eval
  EvalReport report;
  std::optional<WsaResult> wsa;
};

// Scores scenario.eval with the recipe's attack and evaluates it. WSA is
// trained on scenario.no_train and scenario.all only.
AttackOutcome run_attack(const Scenario& scenario, const AttackRecipe& recipe);

}  // namespace miaudit

#endif  // MIAUDIT_PROTOCOL_HPP_
