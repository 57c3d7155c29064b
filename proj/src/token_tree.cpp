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

#include "treedec/token_tree.hpp"

#include <functional>

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace treedec {

namespace {

// Weights are products of factors in [0, 1]; allow for rounding in
// externally supplied values.
constexpr double kWeightSlack = 1e-12;

std::string at_node(std::size_t i) { return "node " + std::to_string(i) + ": "; }

}  // namespace

TokenTree::TokenTree(TokenId root_token, std::vector<TreeNode> nodes)
    : root_token_(root_token), nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    if (n.rank < 1) throw TreeError(at_node(i) + "rank must be >= 1");
    if (n.parent == kRootParent) {
      if (n.depth != 1) throw TreeError(at_node(i) + "root children must have depth 1");
      continue;
    }
    if (n.parent < 0 || static_cast<std::size_t>(n.parent) >= i) {
      throw TreeError(at_node(i) + "parent must precede the node");
    }
    const TreeNode& p = nodes_[static_cast<std::size_t>(n.parent)];
    if (n.depth != p.depth + 1) throw TreeError(at_node(i) + "depth must be parent depth + 1");
    if (n.weight > p.weight + kWeightSlack) throw TreeError(at_node(i) + "weight exceeds parent weight");
  }
  std::map<std::pair<NodeIndex, TokenId>, std::size_t> seen;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto [it, inserted] = seen.emplace(std::make_pair(nodes_[i].parent, nodes_[i].token), i);
    if (!inserted) throw TreeError(at_node(i) + "duplicate token under the same parent");
  }
}

int TokenTree::max_depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::vector<NodeIndex> TokenTree::children(NodeIndex parent) const {
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].parent == parent) out.push_back(static_cast<NodeIndex>(i));
  }
  return out;
}

std::vector<NodeIndex> TokenTree::leaves() const {
  std::vector<bool> has_child(nodes_.size(), false);
  for (const auto& n : nodes_) {
    if (n.parent != kRootParent) has_child[static_cast<std::size_t>(n.parent)] = true;
  }
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!has_child[i]) out.push_back(static_cast<NodeIndex>(i));
  }
  return out;
}

bool TokenTree::is_ancestor_or_self(NodeIndex ancestor, NodeIndex node) const {
  for (NodeIndex cur = node; cur != kRootParent; cur = nodes_[static_cast<std::size_t>(cur)].parent) {
    if (cur == ancestor) return true;
  }
  return false;
}

std::vector<NodeIndex> TokenTree::path_to(NodeIndex node) const {
  std::vector<NodeIndex> path;
  for (NodeIndex cur = node; cur != kRootParent; cur = this->node(cur).parent) path.push_back(cur);
  std::reverse(path.begin(), path.end());
  return path;
}

RankPath TokenTree::rank_path(NodeIndex node) const {
  RankPath ranks;
  for (NodeIndex i : path_to(node)) ranks.push_back(this->node(i).rank);
  return ranks;
}

TokenTree TokenTree::subtree(std::span<const NodeIndex> survivors) const {
  std::vector<NodeIndex> remap(nodes_.size(), -1);
  std::vector<TreeNode> kept;
  kept.reserve(survivors.size());
  NodeIndex prev = -1;
  for (NodeIndex s : survivors) {
    if (s <= prev || static_cast<std::size_t>(s) >= nodes_.size()) {
      throw TreeError("survivors must be strictly increasing node indices");
    }
    prev = s;
    TreeNode n = nodes_[static_cast<std::size_t>(s)];
    if (n.parent != kRootParent) {
      NodeIndex p = remap[static_cast<std::size_t>(n.parent)];
      if (p < 0) throw TreeError("survivor set is not ancestor-closed");
      n.parent = p;
    }
    remap[static_cast<std::size_t>(s)] = static_cast<NodeIndex>(kept.size());
    kept.push_back(n);
  }
  return TokenTree(root_token_, std::move(kept));
}

TokenTree build_tree(TokenId root_token, const HeadPredictions& predictions,
                     std::span<const SelectedNode> selected) {
  const int max_depth = predictions.num_heads();
  std::map<RankPath, const SelectedNode*> by_path;
  for (const auto& s : selected) {
    if (s.path.empty()) throw TreeError("selected node has an empty rank path");
    if (static_cast<int>(s.path.size()) > max_depth) {
      throw TreeError("selected node depth exceeds the number of draft heads");
    }
    for (std::size_t d = 0; d < s.path.size(); ++d) {
      const int k = static_cast<int>(predictions.heads[d].size());
      if (s.path[d] < 1 || s.path[d] > k) throw TreeError("selected node rank outside the head's Top-k");
    }
    if (!by_path.emplace(s.path, &s).second) throw TreeError("duplicate node in selection");
  }
  for (const auto& [path, _] : by_path) {
    if (path.size() > 1 && !by_path.contains(RankPath(path.begin(), path.end() - 1))) {
      throw TreeError("selection is not ancestor-closed");
    }
  }

  // Depth-major; within a depth, by parent index then rank.
  std::vector<TreeNode> nodes;
  nodes.reserve(by_path.size());
  std::map<RankPath, NodeIndex> index_of;
  std::vector<std::pair<RankPath, const SelectedNode*>> level;
  for (int depth = 1; depth <= max_depth; ++depth) {
    level.clear();
    for (const auto& [path, sel] : by_path) {
      if (static_cast<int>(path.size()) == depth) level.emplace_back(path, sel);
    }
    if (level.empty()) break;
    auto parent_of = [&](const RankPath& p) -> NodeIndex {
      return p.size() == 1 ? kRootParent : index_of.at(RankPath(p.begin(), p.end() - 1));
    };
    std::stable_sort(level.begin(), level.end(), [&](const auto& a, const auto& b) {
      const NodeIndex pa = parent_of(a.first), pb = parent_of(b.first);
      if (pa != pb) return pa < pb;
      return a.first.back() < b.first.back();
    });
    for (const auto& [path, sel] : level) {
      TreeNode n;
      n.parent = parent_of(path);
      n.depth = depth;
      n.rank = path.back();
      n.token = predictions.token(depth, n.rank);
      n.weight = sel->weight;
      index_of.emplace(path, static_cast<NodeIndex>(nodes.size()));
      nodes.push_back(n);
    }
  }
  return TokenTree(root_token, std::move(nodes));
}

TreeMask make_mask(const TokenTree& tree) {
  const std::size_t n = tree.size();
  TreeMask mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeIndex cur = static_cast<NodeIndex>(i); cur != kRootParent; cur = tree.node(cur).parent) {
      mask.set(i, static_cast<std::size_t>(cur), true);
    }
  }
  return mask;
}

TreeMask subsample_mask(const TreeMask& mask, std::span<const NodeIndex> survivors) {
  const std::size_t n = mask.size();
  std::vector<bool> kept(n, false);
  NodeIndex prev = -1;
  for (NodeIndex s : survivors) {
    if (s <= prev || static_cast<std::size_t>(s) >= n) {
      throw TreeError("survivors must be strictly increasing node indices");
    }
    prev = s;
    kept[static_cast<std::size_t>(s)] = true;
  }
  TreeMask out(survivors.size());
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    const auto src = static_cast<std::size_t>(survivors[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (mask(src, j) && !kept[j]) throw TreeError("survivor set is not ancestor-closed");
    }
    for (std::size_t j = 0; j < survivors.size(); ++j) {
      out.set(i, j, mask(src, static_cast<std::size_t>(survivors[j])));
    }
  }
  return out;
}

std::vector<std::vector<TokenId>> flatten_paths(const TokenTree& tree) {
  // Depth-first, children in index order, so paths sharing a prefix stay adjacent.
  std::vector<std::vector<TokenId>> out;
  std::vector<TokenId> seq;
  std::function<void(NodeIndex)> walk = [&](NodeIndex at) {
    const auto kids = tree.children(at);
    if (at != kRootParent && kids.empty()) out.push_back(seq);
    for (NodeIndex k : kids) {
      seq.push_back(tree.node(k).token);
      walk(k);
      seq.pop_back();
    }
  };
  walk(kRootParent);
  return out;
}

void write_tree(std::ostream& os, const TokenTree& tree) {
  os << "root " << tree.root_token() << '\n';
  std::ostringstream w;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const TreeNode& n = tree.nodes()[i];
    w.str("");
    w.precision(17);
    w << n.weight;
    os << i << ' ' << n.token << ' ' << n.parent << ' ' << n.depth << ' ' << n.rank << ' ' << w.str()
       << '\n';
  }
}

TokenTree read_tree(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw TreeError("tree text: missing root line");
  std::istringstream head(line);
  std::string tag;
  TokenId root = 0;
  if (!(head >> tag >> root) || tag != "root") throw TreeError("tree text: malformed root line");
  std::vector<TreeNode> nodes;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t index = 0;
    TreeNode n;
    if (!(ls >> index >> n.token >> n.parent >> n.depth >> n.rank >> n.weight) || index != nodes.size()) {
      throw TreeError("tree text: malformed node line " + std::to_string(nodes.size() + 2));
    }
    nodes.push_back(n);
  }
  return TokenTree(root, std::move(nodes));
}

void write_mask(std::ostream& os, const TreeMask& mask) {
  for (std::size_t i = 0; i < mask.size(); ++i) {
    for (std::size_t j = 0; j < mask.size(); ++j) os << (mask(i, j) ? '1' : '0');
    os << '\n';
  }
}

TreeMask read_mask(std::istream& is) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) rows.push_back(line);
  }
  TreeMask mask(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw TreeError("mask text: row " + std::to_string(i) + " has wrong width");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const char c = rows[i][j];
      if (c != '0' && c != '1') throw TreeError("mask text: expected 0 or 1");
      mask.set(i, j, c == '1');
    }
  }
  return mask;
}

const TreeMask& MaskCache::get(const TokenTree& tree) {
  std::vector<NodeIndex> shape;
  shape.reserve(tree.size());
  for (const auto& n : tree.nodes()) shape.push_back(n.parent);
  if (!valid_ || shape != shape_) {
    shape_ = std::move(shape);
    mask_ = make_mask(tree);
    valid_ = true;
    ++rebuilds_;
  }
  return mask_;
}

}  // namespace treedec
