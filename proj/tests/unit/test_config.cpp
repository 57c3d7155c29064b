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

#include "treedec/config.hpp"

namespace treedec {
namespace {

const char* kValid = R"(backend:
  kind: synthetic
  seed: 5
  vocab_size: 300
  layers: 12
  head_rank_probs:
    - [0.5, 0.1]
    - [0.4, 0.1]
  early_quality: [0.6, 0.7, 0.8]
  latency:
    c0: 4.0
    c1_per_batch: 0.2
engine:
  mode: prune_only
  draft_heads: 2
  topk: 2
  eos_token: 7
  prune:
    layer: 3
    topk: 20
  scheduler:
    sizes: [1, 2, 4]
    count_bonus: true
  static_tree:
    paths: [[1], [1, 1], [2]]
workload:
  synthetic:
    count: 3
    min_length: 2
    max_length: 4
  max_tokens: 9
  batch_size: 2
output:
  metrics: m.jsonl
sweep:
  batch: [1, 2]
  mode: [static_tree, propd_full]
)";

// Line number that the error message points at.
int error_line(const std::string& text) {
  try {
    parse_config(text, "cfg.yaml");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_EQ(msg.rfind("cfg.yaml:", 0), 0u) << msg;
    return std::stoi(msg.substr(9));
  }
  ADD_FAILURE() << "no ConfigError raised";
  return -1;
}

TEST(Config, ParsesEverySection) {
  const RunConfig c = parse_config(kValid);
  EXPECT_EQ(c.backend.kind, BackendKind::kSynthetic);
  EXPECT_EQ(c.backend.synthetic.seed, 5u);
  EXPECT_EQ(c.backend.synthetic.vocab_size, 300);
  EXPECT_EQ(c.backend.synthetic.early_quality.size(), 3u);
  EXPECT_EQ(c.backend.latency.c0, 4.0);
  EXPECT_EQ(c.backend.latency.seed, 5u);
  EXPECT_TRUE(c.backend.simulated_clock);
  EXPECT_EQ(c.engine.mode, Mode::kPruneOnly);
  EXPECT_EQ(c.engine.eos_token, 7);
  EXPECT_EQ(c.engine.prune.layer, 3);
  EXPECT_EQ(c.engine.scheduler.size_candidates, (std::vector<int>{1, 2, 4}));
  EXPECT_TRUE(c.engine.scheduler.count_bonus);
  EXPECT_EQ(c.engine.static_tree.paths.size(), 3u);
  EXPECT_EQ(c.workload.max_tokens, 9);
  EXPECT_EQ(c.output.metrics, "m.jsonl");
  EXPECT_EQ(c.sweep.mode, (std::vector<Mode>{Mode::kStaticTree, Mode::kFull}));
  EXPECT_EQ(make_prompts(c).size(), 3u);
}

TEST(Config, InvalidModeIsAnchored) {
  std::string t = kValid;
  t.replace(t.find("prune_only"), 10, "turbo");
  EXPECT_EQ(error_line(t), 14);
}

TEST(Config, UnknownKeyIsAnchored) {
  std::string t = kValid;
  t.replace(t.find("  eos_token"), 0, "  colour: blue\n");
  EXPECT_EQ(error_line(t), 17);
}

TEST(Config, WrongTypeIsAnchored) {
  std::string t = kValid;
  t.replace(t.find("max_tokens: 9"), 13, "max_tokens: lots");
  EXPECT_EQ(error_line(t), 31);
}

TEST(Config, DomainChecks) {
  EXPECT_EQ(error_line("backend:\n  kind: gpu\n"), 2);
  EXPECT_EQ(error_line("backend:\n  kind: synthetic\n  head_rank_probs: [[0.9, 0.2]]\n"), 3);
  EXPECT_GT(error_line("backend:\n  kind: tiny_transformer\nengine:\n  mode: prune_only\n  prune:\n    layer: 4\n"), 0);
  EXPECT_EQ(error_line("backend:\n  kind: tiny_transformer\nengine:\n  prune:\n    criterion: probability\n"), 5);
  EXPECT_EQ(error_line("backend:\n  kind: tiny_transformer\n  early_quality: 0.5\n"), 3);
  EXPECT_EQ(error_line("engine:\n  mode: static_tree\n"), 1);
  EXPECT_EQ(error_line("backend: [1, 2"), 1);
}

TEST(Config, TinyTakesHeadsFromEngine) {
  const RunConfig c = parse_config("backend:\n  kind: tiny_transformer\n  hidden: 32\nengine:\n  mode: static_tree\n  draft_heads: 2\n");
  EXPECT_EQ(c.backend.tiny.draft_heads, 2);
  EXPECT_EQ(c.backend.tiny.hidden, 32);
}

TEST(Config, PromptFileRelativeToConfig) {
  const auto dir = std::filesystem::temp_directory_path() / "treedec_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "p.txt") << "# comment\n1 2 3\n\n4 5\n";
    std::ofstream(dir / "c.yaml") << "backend:\n  kind: tiny_transformer\nengine:\n  mode: autoregressive\nworkload:\n  prompts: p.txt\n";
    std::ofstream(dir / "bad.txt") << "1 2\n3 x\n";
    std::ofstream(dir / "b.yaml") << "backend:\n  kind: tiny_transformer\nengine:\n  mode: autoregressive\nworkload:\n  prompts: bad.txt\n";
  }
  const RunConfig c = load_config((dir / "c.yaml").string());
  EXPECT_EQ(make_prompts(c), (std::vector<std::vector<TokenId>>{{1, 2, 3}, {4, 5}}));
  try {
    make_prompts(load_config((dir / "b.yaml").string()));
    ADD_FAILURE();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.txt:2:"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST(Config, SeedOverrideReachesEverySeed) {
  RunConfig c = parse_config(kValid);
  override_seed(c, 99);
  EXPECT_EQ(c.backend.synthetic.seed, 99u);
  EXPECT_EQ(c.backend.tiny.seed, 99u);
  EXPECT_EQ(c.backend.latency.seed, 99u);
  EXPECT_EQ(c.workload.synthetic_seed, 99u);
}

}  // namespace
}  // namespace treedec
