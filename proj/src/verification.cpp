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

#include "treedec/verification.hpp"

namespace treedec {

VerifyResult verify(const TokenTree& tree, std::span<const TokenId> node_argmax, TokenId root_argmax) {
  if (node_argmax.size() != tree.size()) throw TreeError("argmax must be given for every tree node");
  VerifyResult r;
  NodeIndex current = kRootParent;
  TokenId target = root_argmax;
  // Children follow their parent in topological order, so one forward sweep
  // visits each candidate after its parent was accepted.
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const TreeNode& n = tree.nodes()[i];
    if (n.parent != current || n.token != target) continue;
    current = static_cast<NodeIndex>(i);
    r.accepted.push_back(current);
    target = node_argmax[i];
  }
  r.bonus = target;
  return r;
}

TokenId argmax(std::span<const float> logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

}  // namespace treedec
