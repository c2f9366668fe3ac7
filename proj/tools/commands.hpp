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

#ifndef MIAUDIT_TOOLS_COMMANDS_HPP_
#define MIAUDIT_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "miaudit/attacks.hpp"
#include "miaudit/protocol.hpp"
#include "miaudit/simulator.hpp"

namespace miaudit::cli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  unsigned threads = 1;
  bool record_runtime = false;  // wall-clock fields in report.txt and run_manifest.json
};

// Where the attack inputs come from: a `simulate` output directory (split by
// the protocol) or explicit MIAF files.
struct InputOptions {
  std::filesystem::path sim_dir;
  std::string pool = "shift";  // non-member population used with --sim
  std::optional<std::size_t> nonmember_size;
  std::filesystem::path eval_file;
  std::filesystem::path nonmember_file;
  std::filesystem::path all_file;
};

struct AttackOptions {
  InputOptions input;
  WsaConfig wsa;
  TrainConfig train;
  std::string strategy = "threshold";
  bool no_balance = false;
  std::vector<double> fpr_targets = {0.01};
  double cutoff = 0.5;
};

int cmd_simulate(const GlobalOptions& g, SimConfig cfg);
int cmd_attack(const GlobalOptions& g, AttackKind kind, AttackOptions opt);
int cmd_eval(const GlobalOptions& g, const std::filesystem::path& scores, const std::vector<double>& fpr_targets,
             double cutoff);
int cmd_sweep(const GlobalOptions& g, const std::string& dimension, AttackOptions opt,
              const std::vector<double>& values, const std::vector<std::string>& attacks, bool renormalize);
int cmd_defend(const GlobalOptions& g, const std::filesystem::path& in, double sigma, bool renormalize);
int cmd_dedup(const GlobalOptions& g, const std::filesystem::path& a, const std::filesystem::path& b);
int cmd_inspect(const std::filesystem::path& file);

}  // namespace miaudit::cli

#endif  // MIAUDIT_TOOLS_COMMANDS_HPP_
