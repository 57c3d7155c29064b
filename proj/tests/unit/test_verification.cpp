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

#include "worked_tree.hpp"
#include "treedec/verification.hpp"

namespace treedec {
namespace {

using namespace testing;

TEST(Verify, NoMatchCommitsOnlyTheBonus) {
  const TokenTree t = worked_tree_tree();
  const std::vector<TokenId> am{0, 0, 0, 0};
  const VerifyResult v = verify(t, am, 42);
  EXPECT_EQ(v.accepted_length(), 0);
  EXPECT_EQ(v.bonus, 42);
  EXPECT_EQ(v.committed(), 1);
}

TEST(Verify, ChainWithBonus) {
  const TokenTree chain(0, {{1, kRootParent, 1, 1, 1}, {2, 0, 2, 1, 1}});
  const std::vector<TokenId> am{2, 26};
  const VerifyResult v = verify(chain, am, 1);
  EXPECT_EQ(v.accepted, (std::vector<NodeIndex>{0, 1}));
  EXPECT_EQ(v.bonus, 26);
  EXPECT_EQ(v.committed(), 3);
}

TEST(Verify, FollowsTheMatchingBranch) {
  const TokenTree t = worked_tree_tree();
  // Root predicts a, a predicts c, c predicts 77.
  const std::vector<TokenId> am{kC, kD, 77, 0};
  const VerifyResult v = verify(t, am, kA);
  EXPECT_EQ(v.accepted, (std::vector<NodeIndex>{0, 2}));
  EXPECT_EQ(v.bonus, 77);
}

TEST(Verify, EmptyTree) {
  const VerifyResult v = verify(TokenTree(5), {}, 9);
  EXPECT_TRUE(v.accepted.empty());
  EXPECT_EQ(v.bonus, 9);
}

TEST(Argmax, LowestIndexWinsTies) {
  const std::vector<float> x{0.5f, 2.0f, 2.0f, -1.0f};
  EXPECT_EQ(argmax(x), 1);
}

}  // namespace
}  // namespace treedec
