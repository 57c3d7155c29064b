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

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "treedec/token_tree.hpp"
#include "treedec/types.hpp"

namespace treedec {

/// Online Top-k hit rates of the draft heads.
///
/// cumulative(d, k) is the smoothed frequency with which the token finally
/// committed at offset d was inside head d's Top-k list; it is non-decreasing
/// in k. marginal(d, k) is the probability that exactly the rank-k token of
/// head d is the right one.
class AcceptanceStats {
 public:
  /// Pre-warm prior min(0.9, 0.5^d) * k / k_max.
  AcceptanceStats(int num_heads, int topk, double alpha, bool warmup = false);
  /// Explicit prior, one row per head; each row must be cumulative in [0, 1].
  AcceptanceStats(std::vector<std::vector<double>> prior, double alpha, bool warmup = false);

  int num_heads() const { return static_cast<int>(cum_.size()); }
  int topk() const { return cum_.empty() ? 0 : static_cast<int>(cum_.front().size()); }
  double alpha() const { return alpha_; }
  bool warmup() const { return warmup_; }
  long sample_count(int depth) const { return samples_.at(static_cast<std::size_t>(depth - 1)); }

  double cumulative(int depth, int rank) const;
  double marginal(int depth, int rank) const;

  /// Folds one observation for head `depth`: the realized token sat at
  /// `rank` in that head's list, or was absent (nullopt). With warmup enabled
  /// the step size is max(alpha, 1/(n+1)), so the first 1/alpha samples form
  /// an exact running mean.
  void observe(int depth, std::optional<int> rank);

 private:
  void check(int depth, int rank) const;

  std::vector<std::vector<double>> cum_;
  std::vector<long> samples_;
  double alpha_;
  bool warmup_;
};

/// Realized (greedy) token per head for one drafting iteration. Heads whose
/// ground truth is not yet known are nullopt and skipped.
void update_stats(AcceptanceStats& stats, std::span<const std::optional<TokenId>> realized,
                  const HeadPredictions& predictions);

double path_contribution(const AcceptanceStats& stats, const RankPath& path);
double expected_tree_length(const AcceptanceStats& stats, const TokenTree& tree);

struct TreeSelection {
  std::vector<SelectedNode> nodes;  // in selection order (descending weight)
  double expected_length = 0.0;
};

/// Number of nodes in the full k^1 + ... + k^D candidate grid, saturated at
/// `cap`.
long grid_capacity(int num_heads, int topk, long cap = 1L << 40);

/// For every requested size, the grid nodes with the largest path
/// contributions. Ties go to the shallower node, then the lexicographically
/// smaller rank path. Sizes that are not positive or exceed the grid
/// capacity are left out of the result.
std::map<int, TreeSelection> select_best_nodes(const AcceptanceStats& stats, std::span<const int> sizes);

/// depth,rank,P,p rows.
void write_stats_csv(std::ostream& os, const AcceptanceStats& stats);

}  // namespace treedec
