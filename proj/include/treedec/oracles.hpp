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

// Slow, independent reference implementations used by the self-test suites
// and the test binaries. None of them share code paths with the routines
// they check beyond the public data types.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "treedec/acceptance_model.hpp"
#include "treedec/backend.hpp"
#include "treedec/cost_model.hpp"
#include "treedec/token_tree.hpp"

namespace treedec::oracle {

/// Every rank path of the D x k grid, in lexicographic order.
std::vector<RankPath> grid_paths(int num_heads, int topk);

/// All ancestor-closed subsets of the grid with at most `max_nodes` nodes,
/// including the empty set. Each subset is sorted lexicographically.
std::vector<std::vector<RankPath>> closed_subsets(int num_heads, int topk, int max_nodes);

/// Uniformly grows an ancestor-closed set of `nodes` grid paths.
std::vector<RankPath> random_closed_subset(std::mt19937_64& rng, int num_heads, int topk, int nodes);

/// Tree over `paths` with distinct synthetic tokens (token = 1 + lexicographic index).
TokenTree tree_from_paths(TokenId root, std::span<const RankPath> paths);

/// Mask from rank-path prefixes: row i sees j iff path(j) is a prefix of path(i).
TreeMask prefix_mask(const TokenTree& tree);

/// Mask of the surviving subtree, built from scratch.
TreeMask rebuilt_mask(const TokenTree& tree, std::span<const NodeIndex> survivors);

/// Product of marginals along the path, written out directly.
double path_product(const AcceptanceStats& stats, const RankPath& path);

/// Best achievable expected length for every size 1..grid size, by
/// exhaustive search over closed subsets (entry i is size i; entry 0 is 0).
std::vector<double> best_lengths(const AcceptanceStats& stats);

/// Argmax of l(i) / (beta0 + beta1 * i) by full scan; ties to the smaller
/// size, non-positive estimates skipped, size 1 when nothing scores.
int brute_choose_size(const std::map<int, double>& l_curve, const LinearFit& fit, bool count_bonus);

/// Ordinary weighted least squares via the 2x2 normal equations.
std::optional<LinearFit> normal_equation_fit(std::span<const double> x, std::span<const double> y,
                                             std::span<const double> w);

/// Mean accepted length of a fixed rank-path tree measured by driving the
/// backend directly (draft, forward, verify, commit) for `trials` iterations.
double measured_tree_length(const ModelBackend& backend, std::span<const RankPath> paths, int num_heads, int topk,
                            long trials, std::uint64_t seed);

/// Plain greedy decoding with the backend: one token per forward.
std::vector<TokenId> greedy_decode(const ModelBackend& backend, std::span<const TokenId> prompt, int max_new_tokens);

}  // namespace treedec::oracle
