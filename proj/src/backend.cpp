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

#include "treedec/backend.hpp"

#include <algorithm>
#include <numeric>

namespace treedec {

void check_accepted_chain(const TokenTree& tree, std::span<const NodeIndex> accepted) {
  NodeIndex expected_parent = kRootParent;
  for (NodeIndex i : accepted) {
    if (i < 0 || static_cast<std::size_t>(i) >= tree.size()) throw TreeError("accepted node out of range");
    if (tree.node(i).parent != expected_parent) throw TreeError("accepted path is not contiguous from the root");
    expected_parent = i;
  }
}

std::vector<TokenId> topk_indices(std::span<const float> scores, int k) {
  const auto n = static_cast<int>(scores.size());
  k = std::clamp(k, 0, n);
  std::vector<TokenId> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](TokenId a, TokenId b) {
    const float sa = scores[static_cast<std::size_t>(a)], sb = scores[static_cast<std::size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace treedec
