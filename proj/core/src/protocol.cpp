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

#include "miaudit/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "miaudit/error.hpp"
#include "miaudit/rng.hpp"
#include "miaudit/split.hpp"

namespace miaudit {

namespace {

std::vector<std::size_t> slice(const std::vector<std::size_t>& perm, std::size_t from, std::size_t count) {
  std::vector<std::size_t> out(perm.begin() + static_cast<std::ptrdiff_t>(from),
                               perm.begin() + static_cast<std::ptrdiff_t>(from + count));
  std::sort(out.begin(), out.end());
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Scenario Scenario::with_nonmember_train_size(std::size_t n) const {
  if (n < 2 || n > no_pool.size()) {
    throw ValidationError("non-member training size " + std::to_string(n) + " outside [2, " +
                          std::to_string(no_pool.size()) + "]");
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Scenario out = *this;
  out.no_train = no_pool.subset(idx);
  return out;
}

void validate(const ProtocolConfig& cfg) {
  if (cfg.eval_members == 0 || cfg.eval_nonmembers == 0) throw ConfigError("eval set needs both classes");
  if (cfg.all_members + cfg.all_nonmembers == 0) throw ConfigError("unlabeled pool is empty");
  if (cfg.nonmember_train < 2) throw ConfigError("need at least 2 known non-members");
  if (cfg.nonmember_train > cfg.nonmember_pool) throw ConfigError("nonmember_train exceeds nonmember_pool");
}

Scenario build_scenario(const FeatureSet& members, const FeatureSet& nonmembers, const ProtocolConfig& cfg) {
  validate(cfg);
  const std::size_t need_m = cfg.eval_members + cfg.all_members;
  const std::size_t need_n = cfg.eval_nonmembers + cfg.all_nonmembers + cfg.nonmember_pool;
  if (members.size() < need_m) {
    throw ValidationError("member set has " + std::to_string(members.size()) + " records, protocol needs " +
                          std::to_string(need_m));
  }
  if (nonmembers.size() < need_n) {
    throw ValidationError("non-member set has " + std::to_string(nonmembers.size()) +
                          " records, protocol needs " + std::to_string(need_n));
  }
  if (!(members.schema() == nonmembers.schema())) throw ValidationError("member and non-member schemas differ");

  Rng rng_m(derive_seed(cfg.seed, {0x5c3a, 1}));
  Rng rng_n(derive_seed(cfg.seed, {0x5c3a, 2}));
  const std::vector<std::size_t> pm = rng_m.permutation(members.size());
  const std::vector<std::size_t> pn = rng_n.permutation(nonmembers.size());

  const FeatureSet eval_m = members.subset(slice(pm, 0, cfg.eval_members));
  const FeatureSet all_m = members.subset(slice(pm, cfg.eval_members, cfg.all_members));
  const FeatureSet eval_n = nonmembers.subset(slice(pn, 0, cfg.eval_nonmembers));
  const FeatureSet all_n = nonmembers.subset(slice(pn, cfg.eval_nonmembers, cfg.all_nonmembers));
  // D_no keeps draw order so every prefix is itself a uniform sample.
  std::vector<std::size_t> no_idx(pn.begin() + static_cast<std::ptrdiff_t>(cfg.eval_nonmembers + cfg.all_nonmembers),
                                  pn.begin() + static_cast<std::ptrdiff_t>(need_n));

  Scenario s;
  const FeatureSet eval_parts[] = {eval_m, eval_n};
  const FeatureSet all_parts[] = {all_m, all_n};
  s.eval = concat(eval_parts);
  s.all = concat(all_parts);
  s.no_pool = nonmembers.subset(no_idx);
  s = s.with_nonmember_train_size(cfg.nonmember_train);

  const FeatureSet roles[] = {s.eval, s.all, s.no_pool};
  if (!assert_disjoint(roles).empty()) throw ValidationError("scenario roles are not id-disjoint");
  return s;
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kCsa: return "csa";
    case AttackKind::kAea: return "aea";
    case AttackKind::kWsa: return "wsa";
  }
  return "?";
}

std::optional<AttackKind> parse_attack_kind(const std::string& text) {
  if (text == "csa") return AttackKind::kCsa;
  if (text == "aea") return AttackKind::kAea;
  if (text == "wsa") return AttackKind::kWsa;
  return std::nullopt;
}

AttackOutcome run_attack(const Scenario& scenario, const AttackRecipe& recipe) {
  const auto start = std::chrono::steady_clock::now();
  AttackOutcome out;
  switch (recipe.kind) {
    case AttackKind::kCsa:
      out.scores = csa_scores(scenario.eval, recipe.threads);
      break;
    case AttackKind::kAea:
      out.scores = aea_scores(scenario.eval, recipe.threads);
      break;
    case AttackKind::kWsa: {
      WsaResult res = wsa_attack(scenario.no_train, scenario.all, recipe.wsa, recipe.train, recipe.hidden_dims);
      out.scores = wsa_scores(res.net, scenario.eval);
      out.wsa = std::move(res);
      break;
    }
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  out.report = evaluate(label_scores(scenario.eval, out.scores), recipe.eval);
  out.report.extra["attack"] = to_string(recipe.kind);
  out.report.extra["n_eval"] = std::to_string(scenario.eval.size());
  out.report.extra["runtime_s"] = fmt(elapsed.count());
  if (out.wsa) {
    out.report.extra["lambda"] = fmt(recipe.wsa.lambda);
    out.report.extra["strategy"] = to_string(recipe.wsa.strategy);
    out.report.extra["n_nonmember_train"] = std::to_string(scenario.no_train.size());
    out.report.extra["pseudo_members"] = std::to_string(out.wsa->pseudo_count);
    out.report.extra["mu_no"] = fmt(out.wsa->stats.mu_no);
    out.report.extra["sigma_no"] = fmt(out.wsa->stats.sigma_no);
    if (out.wsa->mislabel_ratio) out.report.extra["mislabel_ratio"] = fmt(*out.wsa->mislabel_ratio);
  }
  return out;
}

}  // namespace miaudit
