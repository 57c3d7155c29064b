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

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "treedec/pruning.hpp"
#include "treedec/token_tree.hpp"
#include "treedec/types.hpp"

namespace treedec {

/// Committed context of one sequence. The last token is the tree root: it is
/// committed but its hidden state has not been computed yet, so every
/// forward pass starts from it.
class SequenceState {
 public:
  virtual ~SequenceState() = default;
  const std::vector<TokenId>& tokens() const { return tokens_; }
  TokenId root_token() const { return tokens_.back(); }

 protected:
  std::vector<TokenId> tokens_;
};

/// Backend-private intermediate values of a forward pass that commit needs
/// (for example key/value rows of the accepted nodes).
class ForwardScratch {
 public:
  virtual ~ForwardScratch() = default;
};

struct ForwardOptions {
  bool prune = false;    // run the early head and the prune callback
  int prune_layer = 0;   // layers evaluated on every node
  int early_topk = 0;    // length of the early successor lists
  bool want_logits = false;
};

/// Receives the drafted tree and the early head's successor lists (one per
/// node) after `prune_layer` layers; returns the nodes to keep.
using PruneCallback =
    std::function<PruneDecision(const TokenTree& tree, std::span<const std::vector<TokenId>> early_topk)>;

struct ForwardOutput {
  PruneDecision decision;              // survivors index the drafted tree
  TokenTree tree;                      // surviving nodes, re-indexed
  TokenId root_argmax = 0;
  std::vector<TokenId> argmax;         // per surviving node
  std::vector<float> root_logits;      // filled when want_logits
  std::vector<std::vector<float>> logits;
  std::shared_ptr<const ForwardScratch> scratch;
};

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual int vocab_size() const = 0;
  virtual int num_layers() const = 0;
  virtual int max_draft_heads() const = 0;

  /// Non-empty prompt; the last prompt token becomes the first root.
  virtual std::unique_ptr<SequenceState> prefill(std::span<const TokenId> prompt) const = 0;

  virtual HeadPredictions draft(const SequenceState& state, int num_heads, int topk) const = 0;

  /// Evaluates root + tree under `mask`. With options.prune the early Top-K
  /// lists go to `on_prune` after options.prune_layer layers and only the
  /// returned survivors run the remaining layers. `state` is not modified.
  virtual ForwardOutput forward_tree(const SequenceState& state, const TokenTree& tree, const TreeMask& mask,
                                     const ForwardOptions& options, const PruneCallback& on_prune) const = 0;

  /// Appends the accepted chain (indices into out.tree) and the bonus token.
  /// Throws TreeError for a chain that does not start at depth 1 or skips a
  /// level.
  virtual void commit(SequenceState& state, const ForwardOutput& out, std::span<const NodeIndex> accepted,
                      TokenId bonus) const = 0;
};

/// Shared validation for commit implementations.
void check_accepted_chain(const TokenTree& tree, std::span<const NodeIndex> accepted);

/// Top-k token ids by descending score, lower id first on ties.
std::vector<TokenId> topk_indices(std::span<const float> scores, int k);

}  // namespace treedec
