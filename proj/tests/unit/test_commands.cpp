// Copyright 2026 The treedec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "treedec/commands.hpp"
#include "treedec/selftest.hpp"

namespace treedec {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string read_dir(const fs::path& dir) {
  std::string all;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) all += e.path().filename().string() + "\n" + slurp(e.path());
  }
  return all;
}

class Commands : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("treedec_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& mode, const std::string& extra = "") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << "backend:\n  kind: synthetic\n  seed: 4\n  vocab_size: 400\n  layers: 16\n"
                        "  head_rank_probs: [[0.6, 0.1], [0.4, 0.1], [0.3, 0.1]]\n"
                        "  latency:\n    noise: 0.5\n"
                        "engine:\n  mode: " << mode << "\n  draft_heads: 3\n  topk: 2\n  prune:\n    layer: 2\n    topk: 20\n"
                        "  scheduler:\n    sizes: [1, 2, 4, 8]\n  static_tree:\n    size: 8\n"
                        "workload:\n  synthetic:\n    count: 6\n  max_tokens: 12\n  batch_size: 2\n"
                     << extra;
    return p;
  }

  int run(const fs::path& cfg, const fs::path& out, bool verbose = false) {
    CommandOptions o;
    o.config_path = cfg.string();
    o.out_dir = out.string();
    o.verbose = verbose;
    std::ostringstream so, se;
    const int rc = cmd_run(o, so, se);
    err_ = se.str();
    return rc;
  }

  fs::path dir_;
  std::string err_;
};

TEST_F(Commands, MinimalRunWritesOutputs) {
  const auto cfg = write_config("c.yaml", "autoregressive");
  ASSERT_EQ(run(cfg, dir_ / "out"), 0) << err_;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "transcripts" / "seq_0000.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "metrics.jsonl"));
  const std::string summary = slurp(dir_ / "out" / "summary.csv");
  EXPECT_EQ(summary.rfind("mode,iterations,tokens", 0), 0u);
  EXPECT_NE(summary.find("\nautoregressive,"), std::string::npos);
}

TEST_F(Commands, VerboseWritesDiagnostics) {
  const auto cfg = write_config("c.yaml", "propd_full");
  ASSERT_EQ(run(cfg, dir_ / "out", true), 0) << err_;
  EXPECT_EQ(slurp(dir_ / "out" / "acceptance.csv").rfind("depth,rank,P,p\n", 0), 0u);
  EXPECT_EQ(slurp(dir_ / "out" / "cost.csv").rfind("size,T_perf,o,W,beta0,beta1\n", 0), 0u);
}

TEST_F(Commands, SameSeedIsByteIdentical) {
  const auto cfg = write_config("c.yaml", "propd_full");
  ASSERT_EQ(run(cfg, dir_ / "a"), 0);
  ASSERT_EQ(run(cfg, dir_ / "b"), 0);
  EXPECT_EQ(read_dir(dir_ / "a" / "transcripts"), read_dir(dir_ / "b" / "transcripts"));
  EXPECT_EQ(read_dir(dir_ / "a"), read_dir(dir_ / "b"));
}

TEST_F(Commands, FullAndStaticAgreeOnTextNotTiming) {
  ASSERT_EQ(run(write_config("f.yaml", "propd_full"), dir_ / "f"), 0);
  ASSERT_EQ(run(write_config("s.yaml", "static_tree"), dir_ / "s"), 0);
  EXPECT_EQ(read_dir(dir_ / "f" / "transcripts"), read_dir(dir_ / "s" / "transcripts"));
  EXPECT_NE(slurp(dir_ / "f" / "summary.csv"), slurp(dir_ / "s" / "summary.csv"));
}

TEST_F(Commands, InvalidModeFailsWithLine) {
  const auto cfg = write_config("c.yaml", "warp_speed");
  EXPECT_NE(run(cfg, dir_ / "out"), 0);
  EXPECT_NE(err_.find("c.yaml:10:"), std::string::npos) << err_;
}

TEST_F(Commands, SweepRowCounts) {
  const auto cfg = write_config("c.yaml", "propd_full",
                                "sweep:\n  batch: [1, 2, 4, 8, 16]\n  prune_layer: [1, 2, 3, 4]\n"
                                "  prune_topk: [50, 100, 150, 200]\n"
                                "  mode: [static_tree, prune_only, dynamic_only, propd_full]\n");
  const RunConfig c = load_config(cfg.string());
  EXPECT_EQ(run_sweep(c, {"batch"}).size(), 5u);
  EXPECT_EQ(run_sweep(c, {"prune_layer", "prune_topk"}).size(), 16u);
  const auto modes = run_sweep(c, {"mode"});
  ASSERT_EQ(modes.size(), 4u);
  for (const auto& r : modes) EXPECT_GT(r.speedup, 0.0);

  CommandOptions o;
  o.config_path = cfg.string();
  o.axis = "batch";
  o.out_dir = (dir_ / "sweep").string();
  std::ostringstream so, se;
  ASSERT_EQ(cmd_sweep(o, so, se), 0) << se.str();
  const std::string csv = slurp(dir_ / "sweep" / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  o.axis = "colour";
  EXPECT_NE(cmd_sweep(o, so, se), 0);
}

TEST(Selftest, DefaultBuildPasses) {
  for (std::uint64_t seed : {1u, 2u}) {
    for (const auto& r : run_selftest(seed)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
}

TEST(Selftest, InjectedMaskOrderBugIsCaught) {
  // Reverses the survivor order before subsampling, so rows land in the
  // wrong positions.
  const MaskSubsampler broken = [](const TreeMask& m, std::span<const NodeIndex> s) {
    TreeMask out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        out.set(i, j, m(static_cast<std::size_t>(s[s.size() - 1 - i]), static_cast<std::size_t>(s[s.size() - 1 - j])));
      }
    }
    return out;
  };
  EXPECT_FALSE(suite_mask_subsample(1, broken).passed);
  EXPECT_TRUE(suite_mask_subsample(1).passed);
}

}  // namespace
}  // namespace treedec
