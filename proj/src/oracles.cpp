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

#include "treedec/oracles.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace treedec::oracle {

namespace {

bool is_prefix(const RankPath& a, const RankPath& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

// Extends `current` with frontier paths in lexicographic order to visit each
// closed set once: a path may be added only if it sorts after the last added
// frontier choice.
void grow(const std::vector<RankPath>& grid, std::vector<RankPath>& current, std::set<RankPath>& members,
          std::size_t min_index, int max_nodes, std::vector<std::vector<RankPath>>& out) {
  out.push_back(current);
  std::sort(out.back().begin(), out.back().end());
  if (static_cast<int>(current.size()) == max_nodes) return;
  for (std::size_t i = min_index; i < grid.size(); ++i) {
    const RankPath& p = grid[i];
    if (members.contains(p)) continue;
    const RankPath parent(p.begin(), p.end() - 1);
    if (!parent.empty() && !members.contains(parent)) continue;
    current.push_back(p);
    members.insert(p);
    grow(grid, current, members, i + 1, max_nodes, out);
    members.erase(p);
    current.pop_back();
  }
}

}  // namespace

std::vector<RankPath> grid_paths(int num_heads, int topk) {
  std::vector<RankPath> out;
  std::vector<RankPath> level{RankPath{}};
  for (int d = 1; d <= num_heads; ++d) {
    std::vector<RankPath> next;
    for (const auto& p : level) {
      for (int r = 1; r <= topk; ++r) {
        RankPath c = p;
        c.push_back(r);
        next.push_back(c);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<RankPath>> closed_subsets(int num_heads, int topk, int max_nodes) {
  // Enumerating in BFS order keeps "parent already present" checkable when
  // the candidate index only moves forward.
  std::vector<RankPath> grid = grid_paths(num_heads, topk);
  std::stable_sort(grid.begin(), grid.end(), [](const RankPath& a, const RankPath& b) { return a.size() < b.size(); });
  std::vector<std::vector<RankPath>> out;
  std::vector<RankPath> current;
  std::set<RankPath> members;
  grow(grid, current, members, 0, max_nodes, out);
  return out;
}

std::vector<RankPath> random_closed_subset(std::mt19937_64& rng, int num_heads, int topk, int nodes) {
  std::vector<RankPath> chosen;
  std::set<RankPath> members;
  std::vector<RankPath> frontier;
  for (int r = 1; r <= topk; ++r) frontier.push_back({r});
  while (static_cast<int>(chosen.size()) < nodes) {
    if (frontier.empty()) throw std::invalid_argument("requested more nodes than the grid holds");
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const std::size_t i = pick(rng);
    RankPath p = frontier[i];
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(i));
    if (static_cast<int>(p.size()) < num_heads) {
      for (int r = 1; r <= topk; ++r) {
        RankPath c = p;
        c.push_back(r);
        frontier.push_back(c);
      }
    }
    members.insert(p);
    chosen.push_back(std::move(p));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

TokenTree tree_from_paths(TokenId root, std::span<const RankPath> paths) {
  std::vector<RankPath> sorted(paths.begin(), paths.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<TreeNode> nodes;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const RankPath& p = sorted[i];
    TreeNode n;
    n.token = static_cast<TokenId>(i + 1);
    n.depth = static_cast<int>(p.size());
    n.rank = p.back();
    n.weight = 1.0;
    if (p.size() > 1) {
      const RankPath parent(p.begin(), p.end() - 1);
      const auto it = std::lower_bound(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(i), parent);
      if (it == sorted.begin() + static_cast<std::ptrdiff_t>(i) || *it != parent) {
        throw std::invalid_argument("path set is not ancestor-closed");
      }
      n.parent = static_cast<NodeIndex>(it - sorted.begin());
    }
    nodes.push_back(n);
  }
  return TokenTree(root, std::move(nodes));
}

TreeMask prefix_mask(const TokenTree& tree) {
  std::vector<RankPath> paths;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    // Walk parents by hand rather than through rank_path().
    RankPath p;
    for (NodeIndex j = static_cast<NodeIndex>(i); j != kRootParent; j = tree.nodes()[static_cast<std::size_t>(j)].parent) {
      p.insert(p.begin(), tree.nodes()[static_cast<std::size_t>(j)].rank);
    }
    paths.push_back(std::move(p));
  }
  TreeMask m(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    for (std::size_t j = 0; j < tree.size(); ++j) m.set(i, j, is_prefix(paths[j], paths[i]));
  }
  return m;
}

TreeMask rebuilt_mask(const TokenTree& tree, std::span<const NodeIndex> survivors) {
  return prefix_mask(tree.subtree(survivors));
}

double path_product(const AcceptanceStats& stats, const RankPath& path) {
  double l = 1.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const int d = static_cast<int>(i) + 1;
    const int k = path[i];
    const double below = k == 1 ? 0.0 : stats.cumulative(d, k - 1);
    l *= std::max(0.0, stats.cumulative(d, k) - below);
  }
  return l;
}

std::vector<double> best_lengths(const AcceptanceStats& stats) {
  const auto grid = grid_paths(stats.num_heads(), stats.topk());
  std::vector<double> best(grid.size() + 1, 0.0);
  for (const auto& subset : closed_subsets(stats.num_heads(), stats.topk(), static_cast<int>(grid.size()))) {
    double total = 0.0;
    for (const auto& p : subset) total += path_product(stats, p);
    best[subset.size()] = std::max(best[subset.size()], total);
  }
  return best;
}

int brute_choose_size(const std::map<int, double>& l_curve, const LinearFit& fit, bool count_bonus) {
  int best_size = 1;
  double best_v = -1.0;
  bool found = false;
  for (const auto& [size, l] : l_curve) {
    const double t = fit.beta0 + fit.beta1 * size;
    if (!(t > 0.0)) continue;
    const double v = (l + (count_bonus ? 1.0 : 0.0)) / t;
    if (!found || v > best_v) {
      best_v = v;
      best_size = size;
      found = true;
    }
  }
  return best_size;
}

std::optional<LinearFit> normal_equation_fit(std::span<const double> x, std::span<const double> y,
                                             std::span<const double> w) {
  long double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const long double det = s * sxx - sx * sx;
  if (s <= 0 || det <= 1e-12L * s * s) return std::nullopt;
  LinearFit f;
  f.beta1 = static_cast<double>((s * sxy - sx * sy) / det);
  f.beta0 = static_cast<double>((sy - static_cast<long double>(f.beta1) * sx) / s);
  return f;
}

double measured_tree_length(const ModelBackend& backend, std::span<const RankPath> paths, int num_heads, int topk,
                            long trials, std::uint64_t seed) {
  std::vector<RankPath> sorted(paths.begin(), paths.end());
  std::sort(sorted.begin(), sorted.end());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<TokenId> tok(0, backend.vocab_size() - 1);
  const ForwardOptions options;
  const PruneCallback none;
  long accepted_total = 0;
  std::unique_ptr<SequenceState> state;
  TreeMask mask;  // the shape never changes, so build it once
  for (long t = 0; t < trials; ++t) {
    if (t % 64 == 0) {
      std::vector<TokenId> prompt(8);
      for (auto& x : prompt) x = tok(rng);
      state = backend.prefill(prompt);
    }
    const HeadPredictions preds = backend.draft(*state, num_heads, topk);
    std::vector<TreeNode> nodes;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const RankPath& p = sorted[i];
      TreeNode n;
      n.depth = static_cast<int>(p.size());
      n.rank = p.back();
      n.token = preds.heads[static_cast<std::size_t>(n.depth - 1)][static_cast<std::size_t>(n.rank - 1)].token;
      if (p.size() > 1) {
        const RankPath parent(p.begin(), p.end() - 1);
        n.parent = static_cast<NodeIndex>(std::lower_bound(sorted.begin(), sorted.end(), parent) - sorted.begin());
      }
      nodes.push_back(n);
    }
    const TokenTree tree(state->root_token(), std::move(nodes));
    if (t == 0) mask = prefix_mask(tree);
    const ForwardOutput out = backend.forward_tree(*state, tree, mask, options, none);
    std::vector<NodeIndex> accepted;
    NodeIndex at = kRootParent;
    TokenId want = out.root_argmax;
    for (bool moved = true; moved;) {
      moved = false;
      for (std::size_t i = 0; i < tree.size(); ++i) {
        if (tree.nodes()[i].parent == at && tree.nodes()[i].token == want) {
          at = static_cast<NodeIndex>(i);
          accepted.push_back(at);
          want = out.argmax[i];
          moved = true;
          break;
        }
      }
    }
    accepted_total += static_cast<long>(accepted.size());
    backend.commit(*state, out, accepted, want);
  }
  return static_cast<double>(accepted_total) / static_cast<double>(trials);
}

std::vector<TokenId> greedy_decode(const ModelBackend& backend, std::span<const TokenId> prompt, int max_new_tokens) {
  auto state = backend.prefill(prompt);
  std::vector<TokenId> out;
  const ForwardOptions options;
  const PruneCallback none;
  while (static_cast<int>(out.size()) < max_new_tokens) {
    const TokenTree empty(state->root_token());
    const ForwardOutput fwd = backend.forward_tree(*state, empty, TreeMask(0), options, none);
    out.push_back(fwd.root_argmax);
    if (static_cast<int>(out.size()) < max_new_tokens) backend.commit(*state, fwd, {}, fwd.root_argmax);
  }
  return out;
}

}  // namespace treedec::oracle
