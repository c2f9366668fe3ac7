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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "miaudit/defenses.hpp"
#include "miaudit/error.hpp"
#include "miaudit/feature_io.hpp"
#include "miaudit/ingest.hpp"
#include "miaudit/metrics.hpp"
#include "miaudit/similarity.hpp"
#include "run_manifest.hpp"

namespace miaudit::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void prepare_out(const GlobalOptions& g) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw IoError("cannot create output directory " + g.out.string() + ": " + ec.message());
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string full(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

FeatureSet read_input(const fs::path& path, RunManifest& manifest) {
  manifest.add_input(path);
  return read_feature_set(path);
}

bool fully_labeled(const FeatureSet& set) {
  return std::none_of(set.records().begin(), set.records().end(),
                      [](const FeatureRecord& r) { return r.tag == MembershipTag::kUnknown; });
}

Scenario load_scenario(const GlobalOptions& g, const InputOptions& in, bool need_wsa, RunManifest& manifest) {
  Scenario s;
  if (!in.sim_dir.empty()) {
    if (!in.eval_file.empty() || !in.nonmember_file.empty() || !in.all_file.empty()) {
      throw ValidationError("--sim cannot be combined with --eval, --nonmember-train or --all");
    }
    const FeatureSet members = read_input(in.sim_dir / "members.miaf", manifest);
    const FeatureSet nonmembers =
        read_input(in.sim_dir / (in.pool == "in" ? "nonmembers_in.miaf" : "nonmembers_shift.miaf"), manifest);
    ProtocolConfig pc;
    pc.seed = g.seed;
    const std::size_t fixed = pc.eval_nonmembers + pc.all_nonmembers;
    if (nonmembers.size() > fixed + 1 && nonmembers.size() < fixed + pc.nonmember_pool) {
      pc.nonmember_pool = nonmembers.size() - fixed;
      pc.nonmember_train = std::min(pc.nonmember_train, pc.nonmember_pool);
    }
    if (in.nonmember_size) {
      if (*in.nonmember_size > pc.nonmember_pool) pc.nonmember_pool = *in.nonmember_size;
      pc.nonmember_train = *in.nonmember_size;
    }
    s = build_scenario(members, nonmembers, pc);
    manifest.config()["protocol"] = {{"eval_members", pc.eval_members},
                                     {"eval_nonmembers", pc.eval_nonmembers},
                                     {"all_members", pc.all_members},
                                     {"all_nonmembers", pc.all_nonmembers},
                                     {"nonmember_pool", pc.nonmember_pool},
                                     {"nonmember_train", pc.nonmember_train},
                                     {"pool", in.pool}};
    return s;
  }
  if (in.eval_file.empty()) throw ValidationError("need --eval FILE or --sim DIR");
  s.eval = read_input(in.eval_file, manifest);
  if (need_wsa) {
    if (in.nonmember_file.empty() || in.all_file.empty()) {
      throw ValidationError("wsa needs --nonmember-train FILE and --all FILE (or --sim DIR)");
    }
    s.no_pool = read_input(in.nonmember_file, manifest);
    s.all = read_input(in.all_file, manifest);
    s.no_train = s.no_pool;
    if (in.nonmember_size) s = s.with_nonmember_train_size(*in.nonmember_size);
    const FeatureSet roles[] = {s.eval, s.all, s.no_train};
    const auto violations = assert_disjoint(roles);
    if (!violations.empty()) {
      throw ValidationError("input roles share ids (first: id " + std::to_string(violations.front().id) + ")");
    }
  }
  return s;
}

AttackRecipe make_recipe(const GlobalOptions& g, AttackKind kind, const AttackOptions& opt) {
  AttackRecipe r;
  r.kind = kind;
  r.wsa = opt.wsa;
  r.wsa.strategy = opt.strategy == "random" ? PseudoStrategy::kRandom : PseudoStrategy::kThreshold;
  r.wsa.balance = !opt.no_balance;
  r.wsa.seed = g.seed;
  r.train = opt.train;
  r.train.seed = g.seed;
  r.eval.fpr_targets = opt.fpr_targets;
  r.eval.cutoff = opt.cutoff;
  r.threads = g.threads;
  for (double f : opt.fpr_targets) {
    if (!(f >= 0.0 && f < 1.0)) throw ValidationError("--fpr targets must lie in [0, 1)");
  }
  if (kind == AttackKind::kWsa) validate(r.train);
  return r;
}

void record_recipe(RunManifest& m, const AttackRecipe& r) {
  m.config()["attack"] = to_string(r.kind);
  m.config()["fpr_targets"] = r.eval.fpr_targets;
  m.config()["cutoff"] = r.eval.cutoff.value_or(std::nan(""));
  if (r.kind == AttackKind::kWsa) {
    m.config()["wsa"] = {{"lambda", r.wsa.lambda},
                         {"strategy", to_string(r.wsa.strategy)},
                         {"random_count", r.wsa.random_count ? ojson(*r.wsa.random_count) : ojson(nullptr)},
                         {"balance", r.wsa.balance},
                         {"seed", r.wsa.seed}};
    m.config()["train"] = {{"learning_rate", r.train.learning_rate}, {"momentum", r.train.momentum},
                           {"batch_size", r.train.batch_size},       {"epochs", r.train.epochs},
                           {"holdout_fraction", r.train.holdout_fraction}, {"patience", r.train.patience},
                           {"seed", r.train.seed}};
    m.config()["hidden_dims"] = r.hidden_dims;
  }
}

double tpr_at(const EvalReport& rep, double fpr) {
  const auto it = rep.tpr_at_fpr.find(fpr);
  return it == rep.tpr_at_fpr.end() ? std::nan("") : it->second.tpr;
}

// run_attack always measures runtime; it reaches the files only on request.
void settle_runtime(const GlobalOptions& g, EvalReport& report) {
  if (!g.record_runtime) report.extra.erase("runtime_s");
}

std::string tag_name(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

int cmd_simulate(const GlobalOptions& g, SimConfig cfg) {
  validate(cfg);
  prepare_out(g);
  RunManifest manifest("simulate");
  manifest.config() = {{"seed", cfg.seed},
                       {"latent_dim", cfg.latent_dim},
                       {"input_dim_img", cfg.input_dim_img},
                       {"input_dim_txt", cfg.input_dim_txt},
                       {"hidden_dim", cfg.hidden_dim},
                       {"embed_dim", cfg.embed_dim},
                       {"n_train", cfg.n_train},
                       {"n_nonmember_in", cfg.n_nonmember_in},
                       {"n_nonmember_shift", cfg.n_nonmember_shift},
                       {"noise_std", cfg.noise_std},
                       {"shift_scale", cfg.shift_scale},
                       {"shift_on_manifold", cfg.shift_on_manifold},
                       {"temperature", cfg.temperature},
                       {"epochs", cfg.epochs},
                       {"lr", cfg.lr},
                       {"batch", cfg.batch},
                       {"weight_decay", cfg.weight_decay},
                       {"train_augment", cfg.train_augment},
                       {"k_transforms", cfg.k_transforms},
                       {"threads", g.threads}};

  const SimulationRun run = simulate(cfg, g.threads);
  const std::pair<const char*, const FeatureSet*> files[] = {{"members.miaf", &run.members},
                                                             {"nonmembers_in.miaf", &run.nonmembers_in},
                                                             {"nonmembers_shift.miaf", &run.nonmembers_shift}};
  ojson mean_cs = ojson::object();
  std::map<std::string, double> means;
  for (const auto& [name, set] : files) {
    write_feature_set(*set, g.out / name);
    manifest.add_output(g.out / name);
    const ScoreVector cs = batch_cs(*set, g.threads);
    double sum = 0.0;
    for (double v : cs) sum += v;
    means[name] = sum / static_cast<double>(cs.size());
    mean_cs[name] = means[name];
  }
  const double ln_batch = std::log(static_cast<double>(std::min(cfg.batch, cfg.n_train)));
  ojson& res = manifest.results();
  res["untrained"] = cfg.epochs == 0;
  res["epoch_loss"] = run.training.epoch_loss;
  res["final_loss"] = run.training.epoch_loss.empty() ? ojson(nullptr) : ojson(run.training.epoch_loss.back());
  res["uniform_loss_ln_batch"] = ln_batch;
  if (!run.training.epoch_loss.empty()) res["better_than_uniform"] = run.training.epoch_loss.back() < ln_batch;
  res["mean_cs"] = mean_cs;
  res["cs_gap_member_minus_in"] = means["members.miaf"] - means["nonmembers_in.miaf"];
  res["cs_gap_member_minus_shift"] = means["members.miaf"] - means["nonmembers_shift.miaf"];
  manifest.write(g.out, g.record_runtime);

  std::cout << "simulate: " << (cfg.epochs == 0 ? "untrained model" : "final loss " + num(run.training.epoch_loss.back()))
            << ", mean CS member/in/shift " << num(means["members.miaf"]) << "/" << num(means["nonmembers_in.miaf"])
            << "/" << num(means["nonmembers_shift.miaf"]) << " -> " << g.out.string() << '\n';
  return 0;
}

int cmd_attack(const GlobalOptions& g, AttackKind kind, AttackOptions opt) {
  const AttackRecipe recipe = make_recipe(g, kind, opt);
  RunManifest manifest("attack " + to_string(kind));
  manifest.config()["seed"] = g.seed;
  manifest.config()["threads"] = g.threads;
  record_recipe(manifest, recipe);
  const Scenario scenario = load_scenario(g, opt.input, kind == AttackKind::kWsa, manifest);
  if (kind == AttackKind::kAea && scenario.eval.k_transforms() == 0) {
    throw ConfigError("aea needs transform channels but " +
                      (opt.input.eval_file.empty() ? std::string("the input") : opt.input.eval_file.string()) +
                      " has K = 0; use csa instead");
  }
  prepare_out(g);

  std::optional<WsaResult> wsa;
  ScoreVector scores;
  if (fully_labeled(scenario.eval)) {
    AttackOutcome outcome = run_attack(scenario, recipe);
    const std::string runtime = outcome.report.extra["runtime_s"];
    settle_runtime(g, outcome.report);
    scores = std::move(outcome.scores);
    wsa = std::move(outcome.wsa);
    write_report(g.out / "report.txt", outcome.report);
    write_roc_csv(g.out / "roc.csv", outcome.report.roc_points);
    manifest.add_output(g.out / "report.txt");
    manifest.add_output(g.out / "roc.csv");
    manifest.results()["auc"] = outcome.report.auc;
    for (const auto& [fpr, op] : outcome.report.tpr_at_fpr) manifest.results()["tpr_at_fpr"][tag_name(fpr)] = op.tpr;
    std::cout << to_string(kind) << ": auc " << num(outcome.report.auc);
    for (const auto& [fpr, op] : outcome.report.tpr_at_fpr) std::cout << ", tpr@" << tag_name(fpr) << " " << num(op.tpr);
    if (wsa) std::cout << ", pseudo-members " << wsa->pseudo_count;
    std::cout << ", runtime " << runtime << " s -> " << g.out.string() << '\n';
  } else {
    // No ground truth: scores only.
    switch (kind) {
      case AttackKind::kCsa: scores = csa_scores(scenario.eval, g.threads); break;
      case AttackKind::kAea: scores = aea_scores(scenario.eval, g.threads); break;
      case AttackKind::kWsa:
        wsa = wsa_attack(scenario.no_train, scenario.all, recipe.wsa, recipe.train, recipe.hidden_dims);
        scores = wsa_scores(wsa->net, scenario.eval);
        break;
    }
    std::cout << to_string(kind) << ": scored " << scores.size()
              << " records (unlabeled input, no report) -> " << g.out.string() << '\n';
  }
  write_attack_csv(g.out / "scores.csv", scenario.eval, scores);
  manifest.add_output(g.out / "scores.csv");
  if (wsa) {
    save_wsa_snapshot(g.out / "wsa.mian", {wsa->net, wsa->stats, recipe.wsa});
    write_training_log(g.out / "training_log.csv", wsa->training_log);
    manifest.add_output(g.out / "wsa.mian");
    manifest.add_output(g.out / "training_log.csv");
    manifest.results()["pseudo_members"] = wsa->pseudo_count;
    manifest.results()["mu_no"] = wsa->stats.mu_no;
    manifest.results()["sigma_no"] = wsa->stats.sigma_no;
    if (wsa->mislabel_ratio) manifest.results()["mislabel_ratio"] = *wsa->mislabel_ratio;
  }
  manifest.write(g.out, g.record_runtime);
  return 0;
}

int cmd_eval(const GlobalOptions& g, const fs::path& scores, const std::vector<double>& fpr_targets, double cutoff) {
  RunManifest manifest("eval");
  manifest.add_input(scores);
  std::ifstream in(scores);
  if (!in) throw IoError("cannot open " + scores.string());
  LabeledScores data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("id,", 0) == 0)) continue;
    std::stringstream ss(line);
    std::string id, score, tag;
    if (!std::getline(ss, id, ',') || !std::getline(ss, score, ',') || !std::getline(ss, tag, ',')) {
      throw ValidationError(scores.string() + ":" + std::to_string(line_no) + ": expected id,score,tag");
    }
    char* end = nullptr;
    const double v = std::strtod(score.c_str(), &end);
    if (end == score.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw ValidationError(scores.string() + ":" + std::to_string(line_no) + ": bad score '" + score + "'");
    }
    const auto t = parse_tag(tag);
    if (!t || *t == MembershipTag::kUnknown) {
      throw ValidationError(scores.string() + ":" + std::to_string(line_no) + ": tag must be member or nonmember");
    }
    data.push_back({v, *t == MembershipTag::kMember});
  }
  for (double f : fpr_targets) {
    if (!(f >= 0.0 && f < 1.0)) throw ValidationError("--fpr targets must lie in [0, 1)");
  }
  EvalOptions opts;
  opts.fpr_targets = fpr_targets;
  opts.cutoff = cutoff;
  EvalReport report = evaluate(data, opts);
  report.extra["source"] = scores.filename().string();
  prepare_out(g);
  write_report(g.out / "report.txt", report);
  write_roc_csv(g.out / "roc.csv", report.roc_points);
  manifest.add_output(g.out / "report.txt");
  manifest.add_output(g.out / "roc.csv");
  manifest.config()["fpr_targets"] = fpr_targets;
  manifest.config()["cutoff"] = cutoff;
  manifest.results()["auc"] = report.auc;
  manifest.write(g.out, g.record_runtime);
  std::cout << "eval: auc " << num(report.auc) << " over " << data.size() << " scores -> " << g.out.string() << '\n';
  return 0;
}

int cmd_sweep(const GlobalOptions& g, const std::string& dimension, AttackOptions opt,
              const std::vector<double>& values, const std::vector<std::string>& attacks, bool renormalize) {
  if (values.empty()) throw ValidationError("--values is empty");
  RunManifest manifest("sweep " + dimension);
  manifest.config()["seed"] = g.seed;
  manifest.config()["values"] = values;
  const AttackRecipe base = make_recipe(g, AttackKind::kWsa, opt);
  record_recipe(manifest, base);
  const bool needs_wsa = dimension != "sigma" ||
                         std::find(attacks.begin(), attacks.end(), "wsa") != attacks.end();
  InputOptions input = opt.input;
  if (dimension == "nonmember-size" && !input.sim_dir.empty()) {
    const double largest = *std::max_element(values.begin(), values.end());
    input.nonmember_size = static_cast<std::size_t>(largest);
  }
  const Scenario scenario = load_scenario(g, input, needs_wsa, manifest);
  prepare_out(g);
  std::ofstream csv(g.out / "sweep.csv", std::ios::trunc);
  if (!csv) throw IoError("cannot open " + (g.out / "sweep.csv").string());
  std::size_t failed = 0;

  auto save_report = [&](EvalReport rep, const std::string& name) {
    settle_runtime(g, rep);
    write_report(g.out / name, rep);
    manifest.add_output(g.out / name);
  };

  if (dimension == "sigma") {
    std::vector<SweepCell> cells;
    for (const std::string& name : attacks) {
      AttackRecipe r = base;
      r.kind = *parse_attack_kind(name);
      const std::vector<SweepCell> part = defense_sweep(scenario, values, r, g.seed, renormalize);
      cells.insert(cells.end(), part.begin(), part.end());
    }
    csv.close();
    write_sweep_csv(g.out / "sweep.csv", cells);
    for (const SweepCell& c : cells) {
      if (c.report) {
        save_report(*c.report, "report_sigma_" + tag_name(c.sigma) + "_" + c.attack + ".txt");
      } else {
        ++failed;
        std::cerr << "cell sigma=" << c.sigma << " " << c.attack << " failed: " << c.error << '\n';
      }
    }
  } else {
    AttackRecipe csa = base;
    csa.kind = AttackKind::kCsa;
    const AttackOutcome csa_out = run_attack(scenario, csa);
    save_report(csa_out.report, "report_csa.txt");
    const bool lambda = dimension == "lambda";
    csv << (lambda ? "lambda,pseudo_members,mislabel_ratio,auc,tpr_at_1pct_fpr,acc,csa_auc,error\n"
                   : "nonmember_size,pseudo_members,mislabel_ratio,auc,tpr_at_1pct_fpr,acc,csa_auc,error\n");
    for (double v : values) {
      AttackRecipe r = base;
      std::string err;
      std::optional<AttackOutcome> out;
      try {
        Scenario cell = scenario;
        if (lambda) {
          r.wsa.lambda = v;
        } else {
          if (v < 2 || v != std::floor(v)) throw ValidationError("nonmember sizes must be integers >= 2");
          cell = scenario.with_nonmember_train_size(static_cast<std::size_t>(v));
        }
        out = run_attack(cell, r);
      } catch (const Error& e) {
        err = e.what();
        ++failed;
        std::cerr << "cell " << dimension << "=" << v << " failed: " << err << '\n';
      }
      csv << full(v) << ',';
      if (out) {
        save_report(out->report, "report_" + dimension + "_" + tag_name(v) + ".txt");
        csv << out->wsa->pseudo_count << ',' << (out->wsa->mislabel_ratio ? full(*out->wsa->mislabel_ratio) : "")
            << ',' << full(out->report.auc) << ',' << full(tpr_at(out->report, 0.01)) << ','
            << full(out->report.acc.value_or(std::nan(""))) << ',';
      } else {
        csv << ",,,,,";
      }
      csv << full(csa_out.report.auc) << ',' << csv_quote(err) << '\n';
    }
    if (!csv) throw IoError("write failed: " + (g.out / "sweep.csv").string());
  }
  manifest.add_output(g.out / "sweep.csv");
  manifest.results()["failed_cells"] = failed;
  manifest.write(g.out, g.record_runtime);
  std::cout << "sweep " << dimension << ": " << values.size() << " values, " << failed << " failed cells -> "
            << (g.out / "sweep.csv").string() << '\n';
  return 0;
}

int cmd_defend(const GlobalOptions& g, const fs::path& in, double sigma, bool renormalize) {
  RunManifest manifest("defend");
  const FeatureSet set = read_input(in, manifest);
  const FeatureSet out = perturb_features(set, {sigma, g.seed, renormalize});
  prepare_out(g);
  const fs::path path = g.out / (in.stem().string() + "_defended.miaf");
  if (fs::exists(path) && fs::equivalent(path, in)) throw ValidationError("output would overwrite the input file");
  write_feature_set(out, path);
  manifest.add_output(path);
  manifest.config() = {{"seed", g.seed}, {"sigma", sigma}, {"renormalize", renormalize}};
  manifest.write(g.out, g.record_runtime);
  std::cout << "defend: sigma " << sigma << " applied to " << out.size() << " records -> " << path.string() << '\n';
  return 0;
}

int cmd_dedup(const GlobalOptions& g, const fs::path& a, const fs::path& b) {
  RunManifest manifest("dedup");
  manifest.add_input(a);
  manifest.add_input(b);
  const std::vector<ManifestEntry> ea = read_manifest(a);
  const std::vector<ManifestEntry> eb = read_manifest(b);
  const DedupResult res = dedup(ea, eb);
  prepare_out(g);
  write_manifest(g.out / "kept.jsonl", res.kept);
  write_dedup_report(g.out / "dedup_report.csv", res.removed);
  manifest.add_output(g.out / "kept.jsonl");
  manifest.add_output(g.out / "dedup_report.csv");
  manifest.results() = {{"entries", ea.size()}, {"kept", res.kept.size()}, {"removed", res.removed.size()}};
  manifest.write(g.out, g.record_runtime);
  std::cout << "dedup: kept " << res.kept.size() << " of " << ea.size() << ", removed " << res.removed.size()
            << " -> " << g.out.string() << '\n';
  return 0;
}

int cmd_inspect(const fs::path& file) {
  MiafReader reader(file);
  const MiafHeader& h = reader.header();
  std::cout << "file: " << file.string() << '\n'
            << "version: " << h.version << '\n'
            << "d_img: " << h.d_img << '\n'
            << "d_txt: " << h.d_txt << '\n'
            << "k_transforms: " << h.k_transforms << '\n'
            << "header_records: " << h.n_records << '\n';
  std::map<std::string, std::size_t> hist;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  std::size_t n = 0, degenerate = 0;
  while (auto rec = reader.next()) {
    ++hist[std::string(to_string(rec->tag))];
    try {
      const double cs = cosine_similarity(rec->img, rec->txt);
      lo = std::min(lo, cs);
      hi = std::max(hi, cs);
      sum += cs;
      ++n;
    } catch (const DomainError&) {
      ++degenerate;
    }
  }
  std::cout << "records: " << reader.records_read() << '\n' << "tags:";
  for (const auto& [tag, count] : hist) std::cout << ' ' << tag << '=' << count;
  std::cout << '\n';
  if (n == 0) {
    std::cout << "cs: n/a\n";
  } else {
    std::cout << "cs: min " << num(lo) << " mean " << num(sum / static_cast<double>(n)) << " max " << num(hi) << '\n';
  }
  if (degenerate) std::cout << "zero-norm records: " << degenerate << '\n';
  return 0;
}

}  // namespace miaudit::cli
