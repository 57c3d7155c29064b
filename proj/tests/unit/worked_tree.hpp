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

#pragma once

#include "treedec/acceptance_model.hpp"
#include "treedec/token_tree.hpp"

namespace treedec::testing {

// Worked example: tokens a, b, c, d, e with a at depth 1 rank 1, b and c
// under a at ranks 1 and 2, d and e under b at ranks 1 and 2.
inline constexpr TokenId kRoot = 100, kA = 1, kB = 2, kC = 3, kD = 4, kE = 5;

inline HeadPredictions worked_tree_predictions() {
  HeadPredictions p;
  p.heads = {{{kA, 0.f}, {50, 0.f}}, {{kB, 0.f}, {kC, 0.f}}, {{kD, 0.f}, {kE, 0.f}}};
  return p;
}

// Marginals p(a)=0.8, p(b)=0.75, p(c)=0.225, p(d)=0.5, p(e)=0.1.
inline AcceptanceStats worked_tree_stats() {
  return AcceptanceStats({{0.8, 0.9}, {0.75, 0.975}, {0.5, 0.6}}, 0.05);
}

// Tree {abd, ac} in BFS order a, b, c, d.
inline TokenTree worked_tree_tree() {
  return TokenTree(kRoot, {{kA, kRootParent, 1, 1, 0.8}, {kB, 0, 2, 1, 0.6}, {kC, 0, 2, 2, 0.18}, {kD, 1, 3, 1, 0.3}});
}

}  // namespace treedec::testing
