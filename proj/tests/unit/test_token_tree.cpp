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
#include <sstream>

#include "worked_tree.hpp"
#include "treedec/oracles.hpp"
#include "treedec/token_tree.hpp"

namespace treedec {
namespace {

using testing::worked_tree_predictions;
using testing::worked_tree_tree;

HeadPredictions grid_predictions(int heads, int k) {
  HeadPredictions p;
  for (int d = 0; d < heads; ++d) {
    std::vector<ScoredToken> row;
    for (int r = 0; r < k; ++r) row.push_back({static_cast<TokenId>(10 * d + r), 0.f});
    p.heads.push_back(row);
  }
  return p;
}

TEST(BuildTree, SingleChain) {
  const auto preds = grid_predictions(3, 2);
  const std::vector<SelectedNode> sel{{{1}, 1}, {{1, 1}, 1}, {{1, 1, 1}, 1}};
  const TokenTree t = build_tree(7, preds, sel);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.node(0).parent, kRootParent);
  EXPECT_EQ(t.node(1).parent, 0);
  EXPECT_EQ(t.node(2).parent, 1);
  EXPECT_EQ(t.node(2).token, 20);
}

TEST(BuildTree, FullGridTwoByTwo) {
  const auto preds = grid_predictions(2, 2);
  std::vector<SelectedNode> sel;
  for (const auto& p : oracle::grid_paths(2, 2)) sel.push_back({p, 1.0});
  const TokenTree t = build_tree(7, preds, sel);
  ASSERT_EQ(t.size(), 6u);
  EXPECT_EQ(t.children(kRootParent).size(), 2u);
  EXPECT_EQ(t.children(0).size(), 2u);
  EXPECT_EQ(t.children(1).size(), 2u);
}

TEST(BuildTree, WorkedTreeSelectionGivesAbdAc) {
  const std::vector<SelectedNode> sel{{{1}, 0.8}, {{1, 1}, 0.6}, {{1, 1, 1}, 0.3}, {{1, 2}, 0.18}};
  const TokenTree t = build_tree(testing::kRoot, worked_tree_predictions(), sel);
  EXPECT_EQ(t, worked_tree_tree());
  const std::vector<std::vector<TokenId>> want{{testing::kA, testing::kB, testing::kD}, {testing::kA, testing::kC}};
  EXPECT_EQ(flatten_paths(t), want);
}

TEST(BuildTree, RejectsMissingAncestor) {
  const std::vector<SelectedNode> sel{{{1, 1}, 0.5}};
  EXPECT_THROW(build_tree(0, worked_tree_predictions(), sel), TreeError);
}

TEST(BuildTree, RejectsDuplicateAndOutOfRange) {
  const std::vector<SelectedNode> dup{{{1}, 0.5}, {{1}, 0.5}};
  EXPECT_THROW(build_tree(0, worked_tree_predictions(), dup), TreeError);
  const std::vector<SelectedNode> rank{{{3}, 0.5}};
  EXPECT_THROW(build_tree(0, worked_tree_predictions(), rank), TreeError);
  const std::vector<SelectedNode> depth{{{1}, 1}, {{1, 1}, 1}, {{1, 1, 1}, 1}, {{1, 1, 1, 1}, 1}};
  EXPECT_THROW(build_tree(0, worked_tree_predictions(), depth), TreeError);
}

TEST(TokenTree, RejectsInvalidNodes) {
  EXPECT_THROW(TokenTree(0, {{1, 0, 1, 1, 1.0}}), TreeError);                        // parent not earlier
  EXPECT_THROW(TokenTree(0, {{1, kRootParent, 2, 1, 1.0}}), TreeError);              // depth chain
  EXPECT_THROW(TokenTree(0, {{1, kRootParent, 1, 1, 1.0}, {1, kRootParent, 1, 2, 1.0}}), TreeError);  // sibling tokens
  EXPECT_THROW(TokenTree(0, {{1, kRootParent, 1, 1, 0.5}, {2, 0, 2, 1, 0.9}}), TreeError);  // weight grows
}

TEST(MakeMask, ChainIsLowerTriangular) {
  const TokenTree t(0, {{1, kRootParent, 1, 1, 1}, {2, 0, 2, 1, 1}, {3, 1, 3, 1, 1}});
  const TreeMask m = make_mask(t);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m(i, j), j <= i);
  }
}

TEST(MakeMask, WorkedTreeRows) {
  const TreeMask m = make_mask(worked_tree_tree());
  // rows a, b, c, d over columns a, b, c, d
  const int want[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 0, 1, 0}, {1, 1, 0, 1}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m(i, j), want[i][j] == 1) << i << "," << j;
  }
}

TEST(MakeMask, Empty) { EXPECT_EQ(make_mask(TokenTree(0)).size(), 0u); }

TEST(MakeMask, MatchesPrefixOracleOnEnumeratedTrees) {
  for (const auto& paths : oracle::closed_subsets(3, 2, 6)) {
    const TokenTree t = oracle::tree_from_paths(0, paths);
    ASSERT_EQ(make_mask(t), oracle::prefix_mask(t));
  }
}

TEST(SubsampleMask, Identity) {
  const TokenTree t = worked_tree_tree();
  const std::vector<NodeIndex> all{0, 1, 2, 3};
  EXPECT_EQ(subsample_mask(make_mask(t), all), make_mask(t));
}

TEST(SubsampleMask, WorkedTreeDropD) {
  const TokenTree t = worked_tree_tree();
  const std::vector<NodeIndex> keep{0, 1, 2};
  EXPECT_EQ(subsample_mask(make_mask(t), keep), make_mask(t.subtree(keep)));
}

TEST(SubsampleMask, EmptySurvivors) {
  EXPECT_EQ(subsample_mask(make_mask(worked_tree_tree()), {}).size(), 0u);
}

TEST(SubsampleMask, RejectsBadSurvivors) {
  const TreeMask m = make_mask(worked_tree_tree());
  const std::vector<NodeIndex> unsorted{1, 0};
  EXPECT_THROW(subsample_mask(m, unsorted), TreeError);
  const std::vector<NodeIndex> orphan{1};  // b without a
  EXPECT_THROW(subsample_mask(m, orphan), TreeError);
}

TEST(FlattenPaths, ChainAndEmpty) {
  const TokenTree chain(0, {{1, kRootParent, 1, 1, 1}, {2, 0, 2, 1, 1}, {3, 1, 3, 1, 1}});
  EXPECT_EQ(flatten_paths(chain), (std::vector<std::vector<TokenId>>{{1, 2, 3}}));
  EXPECT_TRUE(flatten_paths(TokenTree(0)).empty());
}

TEST(TreeText, RoundTrip) {
  std::stringstream ss;
  write_tree(ss, worked_tree_tree());
  EXPECT_EQ(read_tree(ss), worked_tree_tree());
  std::stringstream ms;
  write_mask(ms, make_mask(worked_tree_tree()));
  EXPECT_EQ(read_mask(ms), make_mask(worked_tree_tree()));
}

TEST(MaskCache, RebuildsOnlyOnShapeChange) {
  MaskCache cache;
  const TokenTree t = worked_tree_tree();
  cache.get(t);
  cache.get(t);
  EXPECT_EQ(cache.rebuilds(), 1u);
  // Same shape, different tokens: still a hit.
  TokenTree other(9, {{7, kRootParent, 1, 1, 0.8}, {8, 0, 2, 1, 0.6}, {9, 0, 2, 2, 0.18}, {6, 1, 3, 1, 0.3}});
  EXPECT_EQ(cache.get(other), make_mask(other));
  EXPECT_EQ(cache.rebuilds(), 1u);
  const std::vector<NodeIndex> keep{0, 1};
  EXPECT_EQ(cache.get(t.subtree(keep)), make_mask(t.subtree(keep)));
  EXPECT_EQ(cache.rebuilds(), 2u);
}

TEST(Subtree, RandomSurvivorsKeepInvariants) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const TokenTree t = oracle::tree_from_paths(0, oracle::random_closed_subset(rng, 3, 3, 1 + trial % 10));
    std::vector<NodeIndex> keep;
    std::vector<bool> alive(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const NodeIndex p = t.node(static_cast<NodeIndex>(i)).parent;
      alive[i] = (p == kRootParent || alive[static_cast<std::size_t>(p)]) && (rng() % 4 != 0);
      if (alive[i]) keep.push_back(static_cast<NodeIndex>(i));
    }
    const TokenTree s = t.subtree(keep);
    // Re-running the validating constructor checks every invariant.
    EXPECT_NO_THROW(TokenTree(s.root_token(), s.nodes()));
    EXPECT_EQ(s.size(), keep.size());
  }
}

}  // namespace
}  // namespace treedec
