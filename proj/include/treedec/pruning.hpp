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

#include <span>
#include <utility>
#include <vector>

#include "treedec/token_tree.hpp"

namespace treedec {

enum class PruneCriterion {
  kTopK,
  // Marginal-probability thresholding. Not supported: it needs the early
  // head's full distribution per node. Rejected at configuration time.
  kProbability,
};

struct PruneConfig {
  int layer = 4;   // backbone layers evaluated before pruning
  int topk = 50;   // early-head candidates a child token must appear in
  PruneCriterion criterion = PruneCriterion::kTopK;
};

struct PruneDecision {
  std::vector<NodeIndex> survivors;
  double prune_rate = 0.0;  // removed / drafted
};

/// Top-K early pruning. A node with a drafted parent survives iff its parent
/// survives and its token is in the parent's early Top-K list; depth-1 nodes
/// always survive. `early_topk[i]` holds the early head's successor
/// candidates for node i.
PruneDecision prune(const TokenTree& tree, std::span<const std::vector<TokenId>> early_topk,
                    const PruneConfig& config);

PruneDecision keep_all(const TokenTree& tree);

/// Gathers the surviving nodes and the matching rows/columns of the cached
/// mask.
std::pair<TokenTree, TreeMask> apply_decision(const TokenTree& tree, const TreeMask& mask,
                                              const PruneDecision& decision);

}  // namespace treedec
