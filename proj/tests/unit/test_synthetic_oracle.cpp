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

#include <cmath>

#include "treedec/oracles.hpp"
#include "treedec/synthetic_oracle.hpp"

namespace treedec {
namespace {

SyntheticOracleConfig base_config() {
  SyntheticOracleConfig c;
  c.vocab_size = 1000;
  c.layers = 32;
  c.seed = 12;
  c.head_rank_probs = {{0.5, 0.2, 0.1}, {0.3, 0.2, 0.1}};
  return c;
}

TEST(SyntheticOracle, TrueCumulative) {
  const SyntheticOracle o(base_config());
  EXPECT_NEAR(o.true_cumulative(1, 2), 0.7, 1e-15);
  EXPECT_NEAR(o.true_cumulative(2, 3), 0.6, 1e-15);
}

TEST(SyntheticOracle, DeterministicGivenContext) {
  const SyntheticOracle o(base_config());
  const std::vector<TokenId> p{1, 2, 3};
  const auto a = o.draft(*o.prefill(p), 2, 3);
  const auto b = o.draft(*o.prefill(p), 2, 3);
  for (int d = 1; d <= 2; ++d) {
    for (int r = 1; r <= 3; ++r) EXPECT_EQ(a.token(d, r), b.token(d, r));
  }
}

TEST(SyntheticOracle, RankDistributionMatchesConfig) {
  // Chi-square goodness of fit over {rank 1, 2, 3, absent} for each head.
  const SyntheticOracle o(base_config());
  std::vector<std::vector<int>> counts(2, std::vector<int>(4, 0));
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const std::vector<TokenId> p{static_cast<TokenId>(i % 1000), static_cast<TokenId>(i / 1000)};
    auto s = o.prefill(p);
    const auto preds = o.draft(*s, 2, 3);
    std::vector<TokenId> ctx = p;
    for (int d = 1; d <= 2; ++d) {
      const TokenId truth = o.next_token(ctx);
      ctx.push_back(truth);
      int slot = 3;
      for (int r = 1; r <= 3; ++r) {
        if (preds.token(d, r) == truth) slot = r - 1;
      }
      ++counts[static_cast<std::size_t>(d - 1)][static_cast<std::size_t>(slot)];
    }
  }
  const auto& q = base_config().head_rank_probs;
  for (std::size_t d = 0; d < 2; ++d) {
    double chi2 = 0.0, rest = 1.0;
    for (std::size_t r = 0; r < 4; ++r) {
      const double p = r < 3 ? q[d][r] : rest;
      if (r < 3) rest -= q[d][r];
      const double e = p * n;
      chi2 += (counts[d][r] - e) * (counts[d][r] - e) / e;
    }
    EXPECT_LT(chi2, 16.27) << "head " << d + 1;  // 3 dof, p = 0.001
  }
}

TEST(SyntheticOracle, GreedyContinuationFollowsTheHash) {
  const SyntheticOracle o(base_config());
  const std::vector<TokenId> p{4, 5, 6};
  const auto out = oracle::greedy_decode(o, p, 5);
  std::vector<TokenId> ctx = p;
  for (TokenId t : out) {
    EXPECT_EQ(t, o.next_token(ctx));
    ctx.push_back(t);
  }
}

TEST(SyntheticOracle, EarlyListsAreNestedAcrossK) {
  auto cfg = base_config();
  cfg.early_quality = {0.5};
  const SyntheticOracle o(cfg);
  auto s = o.prefill(std::vector<TokenId>{9, 9});
  const auto preds = o.draft(*s, 2, 3);
  std::vector<SelectedNode> sel{{{1}, 1}, {{2}, 1}, {{1, 1}, 1}, {{2, 1}, 1}};
  const TokenTree tree = build_tree(9, preds, sel);
  std::vector<std::vector<std::vector<TokenId>>> lists;
  for (int k : {5, 50, 200}) {
    ForwardOptions opt;
    opt.prune = true;
    opt.prune_layer = 4;
    opt.early_topk = k;
    o.forward_tree(*s, tree, make_mask(tree), opt, [&](const TokenTree& t, std::span<const std::vector<TokenId>> e) {
      lists.emplace_back(e.begin(), e.end());
      return keep_all(t);
    });
  }
  for (std::size_t i = 0; i < tree.size(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(lists[0][i][j], lists[2][i][j]);
    for (std::size_t j = 0; j < 50; ++j) EXPECT_EQ(lists[1][i][j], lists[2][i][j]);
  }
}

TEST(SyntheticOracle, PerfectEarlyHeadListsSuccessorFirst) {
  auto cfg = base_config();
  cfg.early_quality = {1.0};
  const SyntheticOracle o(cfg);
  auto s = o.prefill(std::vector<TokenId>{1});
  const auto preds = o.draft(*s, 1, 3);
  std::vector<SelectedNode> sel{{{1}, 1}, {{2}, 1}, {{3}, 1}};
  const TokenTree tree = build_tree(1, preds, sel);
  ForwardOptions opt;
  opt.prune = true;
  opt.prune_layer = 2;
  opt.early_topk = 1;
  const auto out = o.forward_tree(*s, tree, make_mask(tree), opt, [&](const TokenTree& t, std::span<const std::vector<TokenId>> e) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<TokenId> ctx{1, t.node(static_cast<NodeIndex>(i)).token};
      EXPECT_EQ(e[i].front(), o.next_token(ctx));
    }
    return keep_all(t);
  });
  EXPECT_EQ(out.tree.size(), 3u);
}

TEST(SyntheticOracle, MeasuredLengthMatchesIndependentRankModel) {
  // With independent ranks the expected accepted length of a chain of
  // top-1 nodes is q1 + q1 q2.
  const SyntheticOracle o(base_config());
  const std::vector<RankPath> chain{{1}, {1, 1}};
  const double m = oracle::measured_tree_length(o, chain, 2, 3, 20000, 3);
  EXPECT_NEAR(m, 0.5 + 0.5 * 0.3, 0.02);
}

TEST(SyntheticOracle, ConfigValidation) {
  auto c = base_config();
  c.head_rank_probs = {{0.8, 0.3}};
  EXPECT_THROW(SyntheticOracle{c}, std::invalid_argument);
  c = base_config();
  c.early_quality = {1.5};
  EXPECT_THROW(SyntheticOracle{c}, std::invalid_argument);
}

}  // namespace
}  // namespace treedec
