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

#include "treedec/pruning.hpp"

#include <algorithm>
#include <stdexcept>

namespace treedec {

namespace {

double rate(std::size_t kept, std::size_t drafted) {
  return drafted == 0 ? 0.0 : 1.0 - static_cast<double>(kept) / static_cast<double>(drafted);
}

}  // namespace

PruneDecision prune(const TokenTree& tree, std::span<const std::vector<TokenId>> early_topk,
                    const PruneConfig& config) {
  if (config.criterion != PruneCriterion::kTopK) {
    throw std::invalid_argument("only the Top-K pruning criterion is supported");
  }
  if (early_topk.size() != tree.size()) throw TreeError("early Top-K lists must cover every node");
  PruneDecision d;
  std::vector<bool> alive(tree.size(), false);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const TreeNode& n = tree.nodes()[i];
    if (n.parent == kRootParent) {
      alive[i] = true;
    } else if (alive[static_cast<std::size_t>(n.parent)]) {
      const auto& cands = early_topk[static_cast<std::size_t>(n.parent)];
      const auto limit = std::min(cands.size(), static_cast<std::size_t>(std::max(config.topk, 0)));
      alive[i] = std::find(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(limit), n.token) !=
                 cands.begin() + static_cast<std::ptrdiff_t>(limit);
    }
    if (alive[i]) d.survivors.push_back(static_cast<NodeIndex>(i));
  }
  d.prune_rate = rate(d.survivors.size(), tree.size());
  return d;
}

PruneDecision keep_all(const TokenTree& tree) {
  PruneDecision d;
  d.survivors.resize(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) d.survivors[i] = static_cast<NodeIndex>(i);
  return d;
}

std::pair<TokenTree, TreeMask> apply_decision(const TokenTree& tree, const TreeMask& mask,
                                              const PruneDecision& decision) {
  if (mask.size() != tree.size()) throw TreeError("mask does not match the tree");
  TreeMask pruned_mask = subsample_mask(mask, decision.survivors);
  return {tree.subtree(decision.survivors), std::move(pruned_mask)};
}

}  // namespace treedec
