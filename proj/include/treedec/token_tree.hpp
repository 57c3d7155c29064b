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

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "treedec/types.hpp"

namespace treedec {

struct TreeNode {
  TokenId token = 0;
  NodeIndex parent = kRootParent;
  int depth = 1;  // draft head that produced the token
  int rank = 1;   // position within that head's Top-k list
  double weight = 1.0;

  bool operator==(const TreeNode&) const = default;
};

// A node chosen from the candidate grid together with its expected-acceptance
// weight at selection time.
struct SelectedNode {
  RankPath path;
  double weight = 1.0;
};

/// Drafted candidate tree in topological order: depth-major, children grouped
/// under their parent in parent order, siblings by ascending rank. Every
/// node's parent precedes it, which makes the tree attention mask
/// lower-triangular.
class TokenTree {
 public:
  TokenTree() = default;
  explicit TokenTree(TokenId root_token) : root_token_(root_token) {}

  /// Validates the invariants (topological order, depth chain, distinct
  /// (parent, token) pairs, non-increasing weights) and throws TreeError.
  TokenTree(TokenId root_token, std::vector<TreeNode> nodes);

  TokenId root_token() const { return root_token_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(NodeIndex i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  int max_depth() const;

  std::vector<NodeIndex> children(NodeIndex parent) const;
  std::vector<NodeIndex> leaves() const;
  bool is_ancestor_or_self(NodeIndex ancestor, NodeIndex node) const;

  // Ancestors of `node` from the depth-1 node down to `node` itself.
  std::vector<NodeIndex> path_to(NodeIndex node) const;
  RankPath rank_path(NodeIndex node) const;

  /// Keeps only `survivors` (a strictly increasing, ancestor-closed index
  /// list) and re-indexes parents. Throws TreeError otherwise.
  TokenTree subtree(std::span<const NodeIndex> survivors) const;

  bool operator==(const TokenTree&) const = default;

 private:
  TokenId root_token_ = 0;
  std::vector<TreeNode> nodes_;
};

class TreeMask {
 public:
  TreeMask() = default;
  explicit TreeMask(std::size_t n) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool operator()(std::size_t row, std::size_t col) const { return bits_[row * n_ + col] != 0; }
  void set(std::size_t row, std::size_t col, bool v) { bits_[row * n_ + col] = v ? 1 : 0; }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return std::span<const std::uint8_t>(bits_).subspan(r * n_, n_);
  }

  bool operator==(const TreeMask&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Builds the prefix-shared tree for a set of grid nodes. The selection must
/// be ancestor-closed, duplicate-free, within the prediction grid; node tokens
/// come from `predictions` and weights from the selection.
TokenTree build_tree(TokenId root_token, const HeadPredictions& predictions,
                     std::span<const SelectedNode> selected);

TreeMask make_mask(const TokenTree& tree);

/// Row/column gather of a cached mask. `survivors` must be strictly increasing
/// and closed under the ancestor relation encoded in the mask.
TreeMask subsample_mask(const TreeMask& mask, std::span<const NodeIndex> survivors);

std::vector<std::vector<TokenId>> flatten_paths(const TokenTree& tree);

// Line-based debug format. Tree: a "root <token>" line then one
// "<index> <token> <parent> <depth> <rank> <weight>" line per node, parent
// -1 for the root. Mask: one row of '0'/'1' characters per line.
void write_tree(std::ostream& os, const TokenTree& tree);
TokenTree read_tree(std::istream& is);
void write_mask(std::ostream& os, const TreeMask& mask);
TreeMask read_mask(std::istream& is);

/// Caches one mask per tree shape so pruning only needs a subsample.
class MaskCache {
 public:
  const TreeMask& get(const TokenTree& tree);
  std::size_t rebuilds() const { return rebuilds_; }

 private:
  std::vector<NodeIndex> shape_;
  TreeMask mask_;
  bool valid_ = false;
  std::size_t rebuilds_ = 0;
};

}  // namespace treedec
