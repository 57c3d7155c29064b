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

#include <random>

#include "treedec/engine.hpp"
#include "treedec/oracles.hpp"
#include "treedec/synthetic_oracle.hpp"
#include "treedec/tiny_transformer.hpp"

namespace treedec {
namespace {

SyntheticOracleConfig oracle_config(double q) {
  SyntheticOracleConfig c;
  c.vocab_size = 500;
  c.layers = 16;
  c.seed = 21;
  c.head_rank_probs = {{q, 0.1 * (1 - q)}, {q, 0.1 * (1 - q)}, {q, 0.1 * (1 - q)}};
  return c;
}

EngineConfig engine_config(Mode mode) {
  EngineConfig c;
  c.mode = mode;
  c.num_heads = 3;
  c.topk = 2;
  c.static_tree.size = 6;
  c.prune.layer = 2;
  c.prune.topk = 8;
  c.scheduler.size_candidates = {1, 2, 4, 8};
  return c;
}

std::vector<std::vector<TokenId>> prompts(int n, int vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<TokenId>> out;
  for (int i = 0; i < n; ++i) {
    std::vector<TokenId> p(2 + rng() % 6);
    for (auto& t : p) t = static_cast<TokenId>(rng() % static_cast<std::uint64_t>(vocab));
    out.push_back(p);
  }
  return out;
}

TEST(Mode, ParseAndPrint) {
  for (Mode m : {Mode::kAutoregressive, Mode::kStaticTree, Mode::kPruneOnly, Mode::kDynamicOnly, Mode::kFull}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_FALSE(parse_mode("fastest"));
}

TEST(Engine, AutoregressiveCommitsOneTokenPerSequence) {
  const SyntheticOracle o(oracle_config(0.5));
  LatencyModel clock({});
  Engine e(o, engine_config(Mode::kAutoregressive), &clock);
  e.start_batch(prompts(3, 500, 1), 5);
  while (e.active()) {
    const DecodeMetrics m = e.step();
    EXPECT_EQ(m.tokens, m.batch);
    EXPECT_EQ(m.tree_size, 0);
  }
}

TEST(Engine, PerfectDraftsCommitDepthPlusOne) {
  const SyntheticOracle o(oracle_config(1.0));
  auto cfg = engine_config(Mode::kFull);
  cfg.static_tree.paths = {{1}, {1, 1}, {1, 1, 1}};
  cfg.mode = Mode::kStaticTree;
  for (Mode m : {Mode::kStaticTree, Mode::kPruneOnly}) {
    cfg.mode = m;
    LatencyModel clock({});
    Engine e(o, cfg, &clock);
    e.start_batch(prompts(2, 500, 2), 40);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(e.step().tokens, 2 * 4);
  }
}

TEST(Engine, MaxTokensOne) {
  const SyntheticOracle o(oracle_config(0.9));
  LatencyModel clock({});
  Engine e(o, engine_config(Mode::kFull), &clock);
  const RunResult r = e.run(prompts(4, 500, 3), 1, 2);
  for (const auto& t : r.transcripts) EXPECT_EQ(t.size(), 1u);
}

TEST(Engine, MetricsRowPerIteration) {
  const SyntheticOracle o(oracle_config(0.7));
  LatencyModel clock({});
  Engine e(o, engine_config(Mode::kFull), &clock);
  const RunResult r = e.run(prompts(6, 500, 4), 20, 3);
  EXPECT_EQ(static_cast<long>(r.metrics.size()), e.iteration());
  EXPECT_EQ(r.summary.iterations, e.iteration());
  long tokens = 0;
  for (const auto& t : r.transcripts) tokens += static_cast<long>(t.size());
  EXPECT_EQ(r.summary.tokens, tokens);
}

TEST(Engine, AllModesMatchGreedyOnOracle) {
  const SyntheticOracle o(oracle_config(0.6));
  const auto ps = prompts(30, 500, 5);
  for (Mode m : {Mode::kAutoregressive, Mode::kStaticTree, Mode::kPruneOnly, Mode::kDynamicOnly, Mode::kFull}) {
    LatencyModel clock({});
    Engine e(o, engine_config(m), &clock);
    const RunResult r = e.run(ps, 17, 4);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      EXPECT_EQ(r.transcripts[i], oracle::greedy_decode(o, ps[i], 17)) << to_string(m) << " prompt " << i;
    }
  }
}

TEST(Engine, AllModesMatchGreedyOnTinyTransformer) {
  TinyTransformerConfig tc;
  tc.vocab_size = 64;
  tc.hidden = 32;
  tc.mlp_width = 64;
  tc.layers = 3;
  tc.draft_heads = 3;
  tc.draft_noise = 0.2f;
  const TinyTransformer model(tc);
  const auto ps = prompts(8, 64, 6);
  for (Mode m : {Mode::kStaticTree, Mode::kPruneOnly, Mode::kDynamicOnly, Mode::kFull}) {
    LatencyModel clock({});
    Engine e(model, engine_config(m), &clock);
    const RunResult r = e.run(ps, 12, 3);
    for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(r.transcripts[i], oracle::greedy_decode(model, ps[i], 12));
  }
}

TEST(Engine, EosStopsTheSequence) {
  const SyntheticOracle o(oracle_config(0.6));
  const std::vector<TokenId> p{1, 2, 3};
  const auto greedy = oracle::greedy_decode(o, p, 20);
  auto cfg = engine_config(Mode::kFull);
  cfg.eos_token = greedy[4];
  LatencyModel clock({});
  Engine e(o, cfg, &clock);
  const RunResult r = e.run({p}, 20, 1);
  const auto stop = std::find(greedy.begin(), greedy.end(), greedy[4]) - greedy.begin();
  EXPECT_EQ(r.transcripts[0], std::vector<TokenId>(greedy.begin(), greedy.begin() + stop + 1));
}

TEST(Engine, DynamicModeProbesThenPlans) {
  const SyntheticOracle o(oracle_config(0.7));
  LatencyModel clock({});
  Engine e(o, engine_config(Mode::kDynamicOnly), &clock);
  e.start_batch(prompts(2, 500, 7), 50);
  // One probe per usable size, then the first plan.
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(e.step().probe);
  const DecodeMetrics m = e.step();
  EXPECT_TRUE(m.replanned);
  ASSERT_EQ(e.plans().size(), 1u);
  EXPECT_EQ(e.plans()[0].trigger, ReplanTrigger::kInitial);
  ASSERT_TRUE(e.plans()[0].fit);
  EXPECT_NEAR(e.plans()[0].fit->beta0, 10.0 * 1.0, 1e-9);  // noiseless default clock, c0 = 10
}

TEST(Engine, AcceptanceStatsConverge) {
  const SyntheticOracle o(oracle_config(0.6));
  auto cfg = engine_config(Mode::kStaticTree);
  cfg.acceptance_alpha = 1e-4;
  cfg.acceptance_warmup = true;
  LatencyModel clock({});
  Engine e(o, cfg, &clock);
  e.run(prompts(100, 500, 8), 200, 4);
  for (int d = 1; d <= 3; ++d) {
    EXPECT_NEAR(e.acceptance().cumulative(d, 1), 0.6, 0.03);
    EXPECT_NEAR(e.acceptance().cumulative(d, 2), 0.64, 0.03);
  }
}

TEST(Engine, RejectsInconsistentConfig) {
  const SyntheticOracle o(oracle_config(0.5));
  auto cfg = engine_config(Mode::kFull);
  cfg.num_heads = 4;
  EXPECT_THROW(Engine(o, cfg), std::invalid_argument);
  cfg = engine_config(Mode::kPruneOnly);
  cfg.prune.layer = 16;
  EXPECT_THROW(Engine(o, cfg), std::invalid_argument);
  cfg = engine_config(Mode::kStaticTree);
  cfg.static_tree.size = 100;
  EXPECT_THROW(Engine(o, cfg), std::invalid_argument);
}

TEST(Summarize, BatchWeightedMeans) {
  std::vector<DecodeMetrics> m(2);
  m[0].batch = 3;
  m[0].mean_accepted = 1.0;
  m[0].tokens = 6;
  m[0].iteration_time = 10;
  m[0].tree_size = 4;
  m[1].batch = 1;
  m[1].mean_accepted = 3.0;
  m[1].tokens = 4;
  m[1].iteration_time = 10;
  m[1].tree_size = 8;
  const RunSummary s = summarize(m);
  EXPECT_EQ(s.tokens, 10);
  EXPECT_DOUBLE_EQ(s.mean_accepted, 1.5);
  EXPECT_DOUBLE_EQ(s.tokens_per_second, 500.0);
  EXPECT_DOUBLE_EQ(s.mean_tree_size, 6.0);
}

}  // namespace
}  // namespace treedec
