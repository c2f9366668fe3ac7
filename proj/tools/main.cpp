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

// miaudit: membership-inference audit command line.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation failure.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "miaudit/error.hpp"

using namespace miaudit;
using namespace miaudit::cli;

namespace {

void add_input_flags(CLI::App* app, InputOptions& in) {
  app->add_option("--sim", in.sim_dir, "simulate output directory; split into roles by the audit protocol");
  app->add_option("--pool", in.pool, "non-member population with --sim")->check(CLI::IsMember({"shift", "in"}));
  app->add_option("--nonmember-size", in.nonmember_size, "known non-members drawn for WSA with --sim");
  app->add_option("--eval", in.eval_file, "labeled evaluation MIAF file");
  app->add_option("--nonmember-train", in.nonmember_file, "known non-member MIAF file (WSA)");
  app->add_option("--all", in.all_file, "unlabeled candidate pool MIAF file (WSA)");
}

void add_wsa_flags(CLI::App* app, AttackOptions& a) {
  app->add_option("--lambda", a.wsa.lambda, "pseudo-member threshold multiplier")->capture_default_str();
  app->add_option("--strategy", a.strategy, "pseudo-labeling strategy")
      ->check(CLI::IsMember({"threshold", "random"}))
      ->capture_default_str();
  app->add_option("--random-count", a.wsa.random_count, "pseudo-members drawn by the random strategy");
  app->add_flag("--no-balance", a.no_balance, "keep the attack dataset unbalanced");
  app->add_option("--attack-lr", a.train.learning_rate, "attack net learning rate")->capture_default_str();
  app->add_option("--attack-momentum", a.train.momentum, "attack net momentum")->capture_default_str();
  app->add_option("--attack-batch", a.train.batch_size, "attack net batch size")->capture_default_str();
  app->add_option("--attack-epochs", a.train.epochs, "attack net epochs")->capture_default_str();
  app->add_option("--holdout", a.train.holdout_fraction, "held-out fraction for snapshot selection")
      ->capture_default_str();
  app->add_option("--patience", a.train.patience, "early-stop patience in epochs")->capture_default_str();
}

void add_eval_flags(CLI::App* app, AttackOptions& a) {
  app->add_option("--fpr", a.fpr_targets, "FPR targets for TPR@FPR")->capture_default_str();
  app->add_option("--cutoff", a.cutoff, "accuracy cutoff (member iff score >= cutoff)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"miaudit: membership-inference audit toolkit for two-tower embedding models"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for parallel scoring phases")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--record-runtime", g.record_runtime,
               "write wall-clock runtime into reports and manifests (outputs are then not byte-reproducible)");

  SimConfig sim;
  bool input_shift = false;
  CLI::App* simulate = app.add_subcommand("simulate", "train a simulated target and export member/non-member features");
  simulate->add_option("--latent-dim", sim.latent_dim)->capture_default_str();
  simulate->add_option("--input-dim-img", sim.input_dim_img)->capture_default_str();
  simulate->add_option("--input-dim-txt", sim.input_dim_txt)->capture_default_str();
  simulate->add_option("--hidden-dim", sim.hidden_dim)->capture_default_str();
  simulate->add_option("--embed-dim", sim.embed_dim)->capture_default_str();
  simulate->add_option("--n-train", sim.n_train)->capture_default_str();
  simulate->add_option("--n-nonmember-in", sim.n_nonmember_in)->capture_default_str();
  simulate->add_option("--n-nonmember-shift", sim.n_nonmember_shift)->capture_default_str();
  simulate->add_option("--noise-std", sim.noise_std)->capture_default_str();
  simulate->add_option("--shift-scale", sim.shift_scale)->capture_default_str();
  simulate->add_flag("--input-shift", input_shift, "shift the non-member pool off the data manifold");
  simulate->add_option("--temperature", sim.temperature)->capture_default_str();
  simulate->add_option("--epochs", sim.epochs)->capture_default_str();
  simulate->add_option("--lr", sim.lr)->capture_default_str();
  simulate->add_option("--batch", sim.batch)->capture_default_str();
  simulate->add_option("--weight-decay", sim.weight_decay)->capture_default_str();
  simulate->add_flag("--train-augment", sim.train_augment);
  simulate->add_option("--k-transforms", sim.k_transforms)->capture_default_str();

  AttackOptions attack_opt;
  CLI::App* attack = app.add_subcommand("attack", "score and evaluate one membership-inference attack");
  attack->require_subcommand(1);
  CLI::App* kinds[3];
  const char* kind_names[3] = {"csa", "aea", "wsa"};
  for (int i = 0; i < 3; ++i) {
    kinds[i] = attack->add_subcommand(kind_names[i], std::string(kind_names[i]) + " attack");
    add_input_flags(kinds[i], attack_opt.input);
    add_eval_flags(kinds[i], attack_opt);
  }
  add_wsa_flags(kinds[2], attack_opt);

  std::filesystem::path score_file;
  CLI::App* eval = app.add_subcommand("eval", "evaluate an id,score,tag CSV");
  eval->add_option("scores", score_file, "score CSV")->required();
  add_eval_flags(eval, attack_opt);

  AttackOptions sweep_opt;
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_attacks = {"csa", "aea", "wsa"};
  bool sweep_renormalize = false;
  CLI::App* sweep = app.add_subcommand("sweep", "run an attack grid over one dimension");
  sweep->require_subcommand(1);
  const char* dims[3] = {"lambda", "nonmember-size", "sigma"};
  CLI::App* sweep_dims[3];
  for (int i = 0; i < 3; ++i) {
    sweep_dims[i] = sweep->add_subcommand(dims[i], std::string("sweep over ") + dims[i]);
    sweep_dims[i]->add_option("--values", sweep_values, "sweep values")->required()->delimiter(',');
    add_input_flags(sweep_dims[i], sweep_opt.input);
    add_wsa_flags(sweep_dims[i], sweep_opt);
    add_eval_flags(sweep_dims[i], sweep_opt);
  }
  sweep_dims[2]->add_option("--attacks", sweep_attacks, "attacks to run per sigma")->delimiter(',')
      ->check(CLI::IsMember({"csa", "aea", "wsa"}))
      ->capture_default_str();
  sweep_dims[2]->add_flag("--renormalize", sweep_renormalize, "rescale perturbed vectors to unit norm");

  std::filesystem::path defend_in;
  double defend_sigma = 0.0;
  bool defend_renormalize = false;
  CLI::App* defend = app.add_subcommand("defend", "release a Gaussian-perturbed copy of a feature file");
  defend->add_option("input", defend_in, "MIAF file")->required();
  defend->add_option("--sigma", defend_sigma, "noise standard deviation")->required();
  defend->add_flag("--renormalize", defend_renormalize, "rescale perturbed vectors to unit norm");

  std::filesystem::path dedup_a, dedup_b;
  CLI::App* dedup = app.add_subcommand("dedup", "remove entries of A whose caption or image overlaps B");
  dedup->add_option("a", dedup_a, "JSON Lines manifest to filter")->required();
  dedup->add_option("b", dedup_b, "JSON Lines manifest to compare against")->required();

  std::filesystem::path inspect_file;
  CLI::App* inspect = app.add_subcommand("inspect", "summarize a MIAF file");
  inspect->add_option("file", inspect_file, "MIAF file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) {
      sim.seed = g.seed;
      sim.shift_on_manifold = !input_shift;
      return cmd_simulate(g, sim);
    }
    if (attack->parsed()) {
      for (int i = 0; i < 3; ++i) {
        if (kinds[i]->parsed()) return cmd_attack(g, *parse_attack_kind(kind_names[i]), attack_opt);
      }
    }
    if (eval->parsed()) return cmd_eval(g, score_file, attack_opt.fpr_targets, attack_opt.cutoff);
    if (sweep->parsed()) {
      for (int i = 0; i < 3; ++i) {
        if (sweep_dims[i]->parsed()) {
          return cmd_sweep(g, dims[i], sweep_opt, sweep_values, sweep_attacks, sweep_renormalize);
        }
      }
    }
    if (defend->parsed()) return cmd_defend(g, defend_in, defend_sigma, defend_renormalize);
    if (dedup->parsed()) return cmd_dedup(g, dedup_a, dedup_b);
    if (inspect->parsed()) return cmd_inspect(inspect_file);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DecodeError& e) {
    std::cerr << "error: " << e.what();
    if (e.record_index() != DecodeError::npos) std::cerr << " (record index " << e.record_index() << ")";
    std::cerr << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
