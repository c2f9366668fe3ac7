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

#include "miaudit/defenses.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "miaudit/error.hpp"
#include "miaudit/rng.hpp"

namespace miaudit {

namespace {

EmbeddingVec noisy(const EmbeddingVec& v, double sigma, bool renormalize, Rng& rng) {
  std::vector<float> out(v.dim());
  double norm = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    const double x = static_cast<double>(v[i]) + sigma * rng.normal();
    out[i] = static_cast<float>(x);
    norm += static_cast<double>(out[i]) * out[i];
  }
  if (renormalize) {
    norm = std::sqrt(norm);
    if (norm == 0.0) throw DomainError("cannot renormalize a zero vector");
    for (float& x : out) x = static_cast<float>(x / norm);
  }
  return EmbeddingVec(std::move(out));
}

}  // namespace

FeatureSet perturb_features(const FeatureSet& set, const PerturbConfig& cfg) {
  if (!std::isfinite(cfg.sigma) || cfg.sigma < 0.0) {
    throw ValidationError("perturbation sigma must be finite and >= 0");
  }
  if (cfg.sigma == 0.0 && !cfg.renormalize) return set;

  std::vector<FeatureRecord> records;
  records.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const FeatureRecord& r = set[i];
    // Per-record stream: output does not depend on how records are batched.
    Rng rng(derive_seed(cfg.seed, {r.id}));
    FeatureRecord out;
    out.id = r.id;
    out.tag = r.tag;
    out.img = noisy(r.img, cfg.sigma, cfg.renormalize, rng);
    out.txt = noisy(r.txt, cfg.sigma, cfg.renormalize, rng);
    for (const EmbeddingVec& t : r.transformed) out.transformed.push_back(noisy(t, cfg.sigma, cfg.renormalize, rng));
    records.push_back(std::move(out));
  }
  return FeatureSet(set.schema(), std::move(records), set.meta());
}

Scenario perturb_scenario(const Scenario& scenario, const PerturbConfig& cfg) {
  auto role = [&](std::uint64_t tag) {
    PerturbConfig c = cfg;
    c.seed = derive_seed(cfg.seed, {tag});
    return c;
  };
  Scenario out;
  out.eval = perturb_features(scenario.eval, role(1));
  out.all = perturb_features(scenario.all, role(2));
  out.no_pool = perturb_features(scenario.no_pool, role(3));
  return out.with_nonmember_train_size(scenario.no_train.size());
}

std::vector<SweepCell> defense_sweep(const Scenario& scenario, std::span<const double> sigmas,
                                     const AttackRecipe& recipe, std::uint64_t seed, bool renormalize) {
  std::vector<SweepCell> cells;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    SweepCell cell;
    cell.sigma = sigmas[i];
    cell.attack = to_string(recipe.kind);
    try {
      const Scenario released = perturb_scenario(scenario, {sigmas[i], derive_seed(seed, {i}), renormalize});
      AttackOutcome outcome = run_attack(released, recipe);
      outcome.report.extra["sigma"] = std::to_string(sigmas[i]);
      cell.report = std::move(outcome.report);
    } catch (const Error& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepCell> cells) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "sigma,attack,auc,tpr_at_1pct_fpr,acc\n";
  char buf[160];
  for (const SweepCell& c : cells) {
    if (!c.report) {
      std::snprintf(buf, sizeof buf, "%.17g,%s,,,", c.sigma, c.attack.c_str());
    } else {
      const auto it = c.report->tpr_at_fpr.find(0.01);
      const double tpr = it == c.report->tpr_at_fpr.end() ? std::nan("") : it->second.tpr;
      std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g", c.sigma, c.attack.c_str(), c.report->auc, tpr,
                    c.report->acc.value_or(std::nan("")));
    }
    out << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace miaudit
