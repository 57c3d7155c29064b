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
#include <vector>

#include "treedec/token_tree.hpp"

namespace treedec {

struct VerifyResult {
  std::vector<NodeIndex> accepted;  // root-to-leaf chain, possibly empty
  TokenId bonus = 0;
  int accepted_length() const { return static_cast<int>(accepted.size()); }
  int committed() const { return accepted_length() + 1; }
};

/// Greedy tree verification. `node_argmax[i]` is the full model's argmax
/// after node i (given its path); `root_argmax` is the argmax after the
/// committed context. Walks from the root accepting the child that equals
/// the current argmax and stops at the first miss; the argmax there becomes
/// the bonus token.
VerifyResult verify(const TokenTree& tree, std::span<const TokenId> node_argmax, TokenId root_argmax);

/// Lowest-index argmax, used identically on every decoding path.
TokenId argmax(std::span<const float> logits);

}  // namespace treedec
