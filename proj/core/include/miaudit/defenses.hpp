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

#ifndef MIAUDIT_DEFENSES_HPP_
#define MIAUDIT_DEFENSES_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miaudit/metrics.hpp"
#include "miaudit/protocol.hpp"
#include "miaudit/types.hpp"

namespace miaudit {

struct PerturbConfig {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool renormalize = false;
};

// Adds independent N(0, sigma^2) noise to every component of img, txt and all
// transformed channels. sigma == 0 without renormalize returns an exact copy.
// Throws ValidationError for negative or non-finite sigma.
FeatureSet perturb_features(const FeatureSet& set, const PerturbConfig& cfg);

// Applies one perturbation stream per role (eval, all, no_pool) so the
// attacker only ever sees released, noisy features.
Scenario perturb_scenario(const Scenario& scenario, const PerturbConfig& cfg);

struct SweepCell {
  double sigma = 0.0;
  std::string attack;
  std::optional<EvalReport> report;  // empty when the cell failed
  std::string error;
};

// One cell per sigma. Cell i uses the noise stream derive_seed(seed, {i}) so
// cells are independent and reproducible. Attack errors are recorded in the
// cell and the sweep continues.
std::vector<SweepCell> defense_sweep(const Scenario& scenario, std::span<const double> sigmas,
                                     const AttackRecipe& recipe, std::uint64_t seed, bool renormalize = false);

// CSV `sigma,attack,auc,tpr_at_1pct_fpr,acc`; failed cells carry empty values.
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepCell> cells);

}  // namespace miaudit

#endif  // MIAUDIT_DEFENSES_HPP_
