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

// Drives the miaudit executable end to end.

#include <sys/wait.h>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "miaudit/feature_io.hpp"
#include "miaudit/ingest.hpp"
#include "test_support.hpp"

#ifndef MIAUDIT_CLI_PATH
#error "MIAUDIT_CLI_PATH must point at the miaudit executable"
#endif

namespace miaudit {
namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(MIAUDIT_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.output += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Members with aligned modalities, non-members without.
void write_inputs(const testing::TempDir& dir, std::uint32_t k) {
  Rng rng(1);
  auto make = [&](std::size_t n, std::uint64_t first, MembershipTag tag, double rho) {
    std::vector<FeatureRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<float> img(6), txt(6);
      std::vector<std::vector<float>> tr(k, std::vector<float>(6));
      for (int d = 0; d < 6; ++d) {
        img[d] = static_cast<float>(rng.normal());
        txt[d] = static_cast<float>(rho * img[d] + std::sqrt(1 - rho * rho) * rng.normal());
        for (auto& t : tr) t[d] = static_cast<float>(img[d] + 0.2 * rng.normal());
      }
      recs.push_back(testing::make_record(first + i, img, txt, tr, tag));
    }
    return FeatureSet(testing::schema_of(6, 6, k), recs);
  };
  const std::vector<FeatureSet> eval = {make(100, 0, MembershipTag::kMember, 0.8),
                                        make(100, 1000, MembershipTag::kNonMember, 0.0)};
  const std::vector<FeatureSet> all = {make(150, 2000, MembershipTag::kUnknown, 0.8),
                                       make(150, 3000, MembershipTag::kUnknown, 0.0)};
  write_feature_set(concat(eval), dir / "eval.miaf");
  write_feature_set(concat(all), dir / "all.miaf");
  write_feature_set(make(200, 4000, MembershipTag::kNonMember, 0.0), dir / "no.miaf");
}

TEST(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").exit_code, 2);
  EXPECT_EQ(run("frobnicate").exit_code, 2);
  EXPECT_EQ(run("attack csa").exit_code, 2);  // no input
  EXPECT_EQ(run("--help").exit_code, 0);
}

TEST(CliTest, AeaWithoutTransformsExitsTwo) {
  testing::TempDir dir("cli");
  write_inputs(dir, 0);
  const auto r = run("--out " + (dir / "out").string() + " attack aea --eval " + (dir / "eval.miaf").string());
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_NE(r.output.find("K = 0"), std::string::npos) << r.output;
}

TEST(CliTest, AttacksWriteArtifacts) {
  testing::TempDir dir("cli");
  write_inputs(dir, 2);
  const std::string base = "--seed 3 --threads 2 ";
  auto r = run(base + "--out " + (dir / "csa").string() + " attack csa --eval " + (dir / "eval.miaf").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "csa" / "scores.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "csa" / "roc.csv"));
  EXPECT_NE(read_text(dir / "csa" / "report.txt").find("auc="), std::string::npos);
  const auto manifest = nlohmann::json::parse(read_text(dir / "csa" / "run_manifest.json"));
  EXPECT_GT(manifest["results"]["auc"].get<double>(), 0.8);
  EXPECT_EQ(manifest["inputs"].size(), 1u);

  r = run(base + "--out " + (dir / "aea").string() + " attack aea --eval " + (dir / "eval.miaf").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;

  r = run(base + "--out " + (dir / "wsa").string() + " attack wsa --lambda 0.5 --attack-epochs 10 --eval " +
          (dir / "eval.miaf").string() + " --nonmember-train " + (dir / "no.miaf").string() + " --all " +
          (dir / "all.miaf").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "wsa" / "wsa.mian"));
  EXPECT_TRUE(std::filesystem::exists(dir / "wsa" / "training_log.csv"));

  r = run("--out " + (dir / "eval").string() + " eval " + (dir / "csa" / "scores.csv").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(read_text(dir / "eval" / "report.txt").substr(0, 4), "auc=");
}

TEST(CliTest, RuntimeIsRecordedOnlyOnRequest) {
  testing::TempDir dir("cli");
  write_inputs(dir, 0);
  auto r = run("--out " + (dir / "a").string() + " attack csa --eval " + (dir / "eval.miaf").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("runtime"), std::string::npos) << r.output;
  EXPECT_EQ(read_text(dir / "a" / "report.txt").find("runtime_s"), std::string::npos);
  EXPECT_EQ(read_text(dir / "a" / "run_manifest.json").find("created_utc"), std::string::npos);

  r = run("--record-runtime --out " + (dir / "b").string() + " attack csa --eval " + (dir / "eval.miaf").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(read_text(dir / "b" / "report.txt").find("runtime_s="), std::string::npos);
  const auto manifest = nlohmann::json::parse(read_text(dir / "b" / "run_manifest.json"));
  EXPECT_TRUE(manifest.contains("created_utc"));
  EXPECT_TRUE(manifest.contains("runtime_s"));
}

TEST(CliTest, OverlappingRolesExitTwo) {
  testing::TempDir dir("cli");
  write_inputs(dir, 0);
  const auto r = run("--out " + (dir / "o").string() + " attack wsa --eval " + (dir / "eval.miaf").string() +
                     " --nonmember-train " + (dir / "eval.miaf").string() + " --all " + (dir / "all.miaf").string());
  EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST(CliTest, EmptySelectionExitsOne) {
  testing::TempDir dir("cli");
  write_inputs(dir, 0);
  const auto r = run("--out " + (dir / "o").string() + " attack wsa --lambda 50 --eval " +
                     (dir / "eval.miaf").string() + " --nonmember-train " + (dir / "no.miaf").string() + " --all " +
                     (dir / "all.miaf").string());
  EXPECT_EQ(r.exit_code, 1) << r.output;
  EXPECT_NE(r.output.find("threshold"), std::string::npos) << r.output;
}

TEST(CliTest, InspectValidEmptyAndTruncated) {
  testing::TempDir dir("cli");
  write_inputs(dir, 1);
  auto r = run("inspect " + (dir / "eval.miaf").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("d_img"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("200"), std::string::npos) << r.output;

  write_feature_set(FeatureSet(testing::schema_of(3, 3, 0), {}), dir / "empty.miaf");
  r = run("inspect " + (dir / "empty.miaf").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("records: 0"), std::string::npos) << r.output;

  std::filesystem::resize_file(dir / "eval.miaf", std::filesystem::file_size(dir / "eval.miaf") - 10);
  r = run("inspect " + (dir / "eval.miaf").string());
  EXPECT_EQ(r.exit_code, 1) << r.output;
  EXPECT_NE(r.output.find("199"), std::string::npos) << r.output;
}

TEST(CliTest, SimulateDefendSweep) {
  testing::TempDir dir("cli");
  const std::string small =
      " simulate --latent-dim 3 --input-dim-img 12 --input-dim-txt 8 --hidden-dim 16 --embed-dim 4 --n-train 64"
      " --n-nonmember-in 64 --n-nonmember-shift 64 --batch 32 --k-transforms 2";
  auto r = run("--seed 2 --out " + (dir / "sim0").string() + small + " --epochs 0");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  auto manifest = nlohmann::json::parse(read_text(dir / "sim0" / "run_manifest.json"));
  EXPECT_TRUE(manifest["results"]["untrained"].get<bool>());
  for (const char* f : {"members.miaf", "nonmembers_in.miaf", "nonmembers_shift.miaf"}) {
    EXPECT_EQ(run("inspect " + (dir / "sim0" / f).string()).exit_code, 0) << f;
  }

  r = run("--seed 2 --out " + (dir / "sim").string() + small + " --epochs 5");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  manifest = nlohmann::json::parse(read_text(dir / "sim" / "run_manifest.json"));
  EXPECT_FALSE(manifest["results"]["untrained"].get<bool>());
  EXPECT_EQ(manifest["config"]["epochs"], 5);

  r = run("--seed 4 --out " + (dir / "def").string() + " defend " + (dir / "sim" / "members.miaf").string() +
          " --sigma 0.1");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "def" / "members_defended.miaf"));

  write_inputs(dir, 1);
  r = run("--out " + (dir / "sw").string() + " sweep sigma --values 0,1 --attacks csa,aea --eval " +
          (dir / "eval.miaf").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto csv = read_text(dir / "sw" / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sigma,attack,auc,tpr_at_1pct_fpr,acc");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(CliTest, Dedup) {
  testing::TempDir dir("cli");
  const std::vector<ManifestEntry> a = {{1, "http://x/1.jpg", "A dog 7"}, {2, "http://x/2.jpg", "A cat"}};
  const std::vector<ManifestEntry> b = {{10, "http://y/9.jpg", "a DOG"}};
  write_manifest(dir / "a.jsonl", a);
  write_manifest(dir / "b.jsonl", b);
  const auto r = run("--out " + (dir / "d").string() + " dedup " + (dir / "a.jsonl").string() + " " +
                     (dir / "b.jsonl").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto kept = read_manifest(dir / "d" / "kept.jsonl");
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].id, 2u);
  EXPECT_NE(read_text(dir / "d" / "dedup_report.csv").find("1,caption,dog"), std::string::npos);

  std::ofstream(dir / "bad.jsonl") << "not json\n";
  EXPECT_EQ(run("--out " + (dir / "e").string() + " dedup " + (dir / "bad.jsonl").string() + " " +
                (dir / "b.jsonl").string())
                .exit_code,
            2);
}

}  // namespace
}  // namespace miaudit
