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

#include "treedec/acceptance_model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <string>

namespace treedec {

AcceptanceStats::AcceptanceStats(int num_heads, int topk, double alpha, bool warmup)
    : alpha_(alpha), warmup_(warmup) {
  if (num_heads < 1 || topk < 1) throw std::invalid_argument("acceptance stats need >= 1 head and rank");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("acceptance alpha must be in (0, 1)");
  cum_.assign(static_cast<std::size_t>(num_heads), std::vector<double>(static_cast<std::size_t>(topk)));
  samples_.assign(static_cast<std::size_t>(num_heads), 0);
  for (int d = 1; d <= num_heads; ++d) {
    const double top = std::min(0.9, std::pow(0.5, d));
    for (int k = 1; k <= topk; ++k) {
      cum_[static_cast<std::size_t>(d - 1)][static_cast<std::size_t>(k - 1)] =
          top * static_cast<double>(k) / static_cast<double>(topk);
    }
  }
}

AcceptanceStats::AcceptanceStats(std::vector<std::vector<double>> prior, double alpha, bool warmup)
    : cum_(std::move(prior)), alpha_(alpha), warmup_(warmup) {
  if (cum_.empty() || cum_.front().empty()) throw std::invalid_argument("acceptance prior is empty");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("acceptance alpha must be in (0, 1)");
  for (const auto& row : cum_) {
    if (row.size() != cum_.front().size()) throw std::invalid_argument("acceptance prior rows differ in length");
    double prev = 0.0;
    for (double v : row) {
      if (!(v >= prev && v <= 1.0)) {
        throw std::invalid_argument("acceptance prior rows must be non-decreasing within [0, 1]");
      }
      prev = v;
    }
  }
  samples_.assign(cum_.size(), 0);
}

void AcceptanceStats::check(int depth, int rank) const {
  if (depth < 1 || depth > num_heads()) throw std::out_of_range("head depth " + std::to_string(depth));
  if (rank < 1 || rank > topk()) throw std::out_of_range("rank " + std::to_string(rank));
}

double AcceptanceStats::cumulative(int depth, int rank) const {
  check(depth, rank);
  return cum_[static_cast<std::size_t>(depth - 1)][static_cast<std::size_t>(rank - 1)];
}

double AcceptanceStats::marginal(int depth, int rank) const {
  check(depth, rank);
  const auto& row = cum_[static_cast<std::size_t>(depth - 1)];
  const double lower = rank == 1 ? 0.0 : row[static_cast<std::size_t>(rank - 2)];
  // Rounding in the EMA can leave a -1 ulp difference between equal entries.
  return std::max(0.0, row[static_cast<std::size_t>(rank - 1)] - lower);
}

void AcceptanceStats::observe(int depth, std::optional<int> rank) {
  check(depth, 1);
  auto& row = cum_[static_cast<std::size_t>(depth - 1)];
  long& n = samples_[static_cast<std::size_t>(depth - 1)];
  const double a = warmup_ ? std::max(alpha_, 1.0 / static_cast<double>(n + 1)) : alpha_;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double hit = (rank && *rank <= static_cast<int>(k) + 1) ? 1.0 : 0.0;
    row[k] = (1.0 - a) * row[k] + a * hit;
  }
  // Keep the row cumulative under floating point.
  for (std::size_t k = 1; k < row.size(); ++k) row[k] = std::max(row[k], row[k - 1]);
  ++n;
}

void update_stats(AcceptanceStats& stats, std::span<const std::optional<TokenId>> realized,
                  const HeadPredictions& predictions) {
  const int heads = std::min({stats.num_heads(), predictions.num_heads(), static_cast<int>(realized.size())});
  for (int d = 1; d <= heads; ++d) {
    const auto& truth = realized[static_cast<std::size_t>(d - 1)];
    if (!truth) continue;
    std::optional<int> rank;
    const auto& list = predictions.heads[static_cast<std::size_t>(d - 1)];
    const int limit = std::min(static_cast<int>(list.size()), stats.topk());
    for (int r = 0; r < limit; ++r) {
      if (list[static_cast<std::size_t>(r)].token == *truth) {
        rank = r + 1;
        break;
      }
    }
    stats.observe(d, rank);
  }
}

double path_contribution(const AcceptanceStats& stats, const RankPath& path) {
  double l = 1.0;
  for (std::size_t i = 0; i < path.size(); ++i) l *= stats.marginal(static_cast<int>(i) + 1, path[i]);
  return l;
}

double expected_tree_length(const AcceptanceStats& stats, const TokenTree& tree) {
  double total = 0.0;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    total += path_contribution(stats, tree.rank_path(static_cast<NodeIndex>(i)));
  }
  return total;
}

long grid_capacity(int num_heads, int topk, long cap) {
  long total = 0;
  long level = 1;
  for (int d = 0; d < num_heads; ++d) {
    if (level > cap / std::max(topk, 1)) return cap;
    level *= topk;
    total += level;
    if (total >= cap) return cap;
  }
  return total;
}

namespace {

struct Candidate {
  double weight;
  RankPath path;
};

// Max-heap order: larger weight, then shallower, then smaller rank path.
struct WorseCandidate {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.path.size() != b.path.size()) return a.path.size() > b.path.size();
    return a.path > b.path;
  }
};

}  // namespace

std::map<int, TreeSelection> select_best_nodes(const AcceptanceStats& stats, std::span<const int> sizes) {
  const long capacity = grid_capacity(stats.num_heads(), stats.topk());
  int largest = 0;
  for (int s : sizes) {
    if (s > 0 && s <= capacity) largest = std::max(largest, s);
  }

  // Children never outweigh their parent, so popping in weight order yields
  // every prefix as the best ancestor-closed set of that size.
  std::priority_queue<Candidate, std::vector<Candidate>, WorseCandidate> frontier;
  for (int r = 1; r <= stats.topk(); ++r) frontier.push({stats.marginal(1, r), RankPath{r}});
  std::vector<SelectedNode> order;
  std::vector<double> prefix{0.0};
  while (static_cast<int>(order.size()) < largest && !frontier.empty()) {
    Candidate c = frontier.top();
    frontier.pop();
    const int depth = static_cast<int>(c.path.size());
    if (depth < stats.num_heads()) {
      for (int r = 1; r <= stats.topk(); ++r) {
        RankPath child = c.path;
        child.push_back(r);
        frontier.push({c.weight * stats.marginal(depth + 1, r), std::move(child)});
      }
    }
    prefix.push_back(prefix.back() + c.weight);
    order.push_back({std::move(c.path), c.weight});
  }

  std::map<int, TreeSelection> out;
  for (int s : sizes) {
    if (s <= 0 || s > largest) continue;
    TreeSelection sel;
    sel.nodes.assign(order.begin(), order.begin() + s);
    sel.expected_length = prefix[static_cast<std::size_t>(s)];
    out[s] = std::move(sel);
  }
  return out;
}

void write_stats_csv(std::ostream& os, const AcceptanceStats& stats) {
  os << "depth,rank,P,p\n";
  for (int d = 1; d <= stats.num_heads(); ++d) {
    for (int k = 1; k <= stats.topk(); ++k) {
      os << d << ',' << k << ',' << stats.cumulative(d, k) << ',' << stats.marginal(d, k) << '\n';
    }
  }
}

}  // namespace treedec
