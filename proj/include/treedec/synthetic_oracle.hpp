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
#include <vector>

#include "treedec/backend.hpp"

namespace treedec {

struct SyntheticOracleConfig {
  int vocab_size = 1000;
  int layers = 32;
  std::uint64_t seed = 1;
  // head_rank_probs[d-1][r-1]: probability that draft head d ranks the true
  // token at r. Each row sums to at most 1; the rest is "absent".
  std::vector<std::vector<double>> head_rank_probs;
  // Probability that the early head ranks the true successor first, per
  // prune layer (entry n-1 for layer n). Otherwise it is ranked last. A
  // single entry applies to every layer.
  std::vector<double> early_quality{1.0};
};

/// Backend whose greedy continuation is a seeded hash of the full context
/// and whose draft/early heads contain the true token with configured
/// probabilities. Every random draw is keyed on (seed, context hash, purpose),
/// so outputs are pure functions of the committed context.
class SyntheticOracle final : public ModelBackend {
 public:
  explicit SyntheticOracle(SyntheticOracleConfig config);

  const SyntheticOracleConfig& config() const { return config_; }

  int vocab_size() const override { return config_.vocab_size; }
  int num_layers() const override { return config_.layers; }
  int max_draft_heads() const override { return static_cast<int>(config_.head_rank_probs.size()); }

  /// Ground-truth cumulative curve: sum of head_rank_probs[d-1][0..k-1].
  double true_cumulative(int depth, int rank) const;
  double early_quality(int layer) const;

  /// Greedy next token after `context`.
  TokenId next_token(std::span<const TokenId> context) const;

  std::unique_ptr<SequenceState> prefill(std::span<const TokenId> prompt) const override;
  HeadPredictions draft(const SequenceState& state, int num_heads, int topk) const override;
  ForwardOutput forward_tree(const SequenceState& state, const TokenTree& tree, const TreeMask& mask,
                             const ForwardOptions& options, const PruneCallback& on_prune) const override;
  void commit(SequenceState& state, const ForwardOutput& out, std::span<const NodeIndex> accepted,
              TokenId bonus) const override;

 private:
  std::uint64_t extend(std::uint64_t hash, TokenId token) const;
  TokenId next_from_hash(std::uint64_t hash) const;
  std::vector<TokenId> early_list(std::uint64_t node_hash, int layer, int k) const;

  SyntheticOracleConfig config_;
};

}  // namespace treedec
