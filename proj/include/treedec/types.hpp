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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace treedec {

using TokenId = std::int32_t;

// Index into a flattened TokenTree. The committed root token is not a node.
using NodeIndex = std::int32_t;
inline constexpr NodeIndex kRootParent = -1;

// Position of a candidate node inside the k^D grid of head predictions:
// element d-1 is the 1-based rank taken from draft head d. The path length is
// the node's depth and dropping the last element yields the parent.
using RankPath = std::vector<int>;

struct ScoredToken {
  TokenId token = 0;
  float score = 0.0f;
};

// Top-k_max output of each draft head for one sequence; heads[d-1] is the
// ranked list from head d (offset d past the committed root token).
struct HeadPredictions {
  std::vector<std::vector<ScoredToken>> heads;

  int num_heads() const { return static_cast<int>(heads.size()); }
  int topk() const { return heads.empty() ? 0 : static_cast<int>(heads.front().size()); }
  TokenId token(int depth, int rank) const {
    return heads.at(static_cast<std::size_t>(depth - 1)).at(static_cast<std::size_t>(rank - 1)).token;
  }
};

// Thrown for violated preconditions on domain objects (bad trees, survivor
// sets, unknown sizes). Configuration problems use ConfigError instead.
class TreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace treedec
