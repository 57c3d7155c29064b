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

struct TinyTransformerConfig {
  int vocab_size = 256;
  int hidden = 64;
  int attention_heads = 4;
  int mlp_width = 256;
  int layers = 4;
  int draft_heads = 4;
  int max_positions = 1024;
  std::uint64_t seed = 1;
  // Draft head d is the LM head plus draft_noise times a random matrix.
  float draft_noise = 1.0f;
};

// Row-major matrices: a [rows x cols] matrix stores element (r, c) at r*cols+c.
struct TinyLayerWeights {
  std::vector<float> wq, wk, wv, wo;  // hidden x hidden
  std::vector<float> w1, b1;          // hidden x mlp, mlp
  std::vector<float> w2, b2;          // mlp x hidden, hidden
};

struct TinyWeights {
  std::vector<float> token_embedding;     // vocab x hidden
  std::vector<float> position_embedding;  // max_positions x hidden
  std::vector<TinyLayerWeights> layers;
  std::vector<float> lm_head;             // hidden x vocab
  std::vector<float> early_head;          // hidden x vocab
  std::vector<std::vector<float>> draft;  // per head: hidden x vocab
};

/// Small pre-norm decoder with seeded random weights. Layers use a
/// parameter-free RMS norm, multi-head softmax attention, and a GELU MLP;
/// positions come from a learned embedding table. Attention always visits
/// keys in ascending position order so a tree-masked row and the same token
/// decoded sequentially perform identical arithmetic.
class TinyTransformer final : public ModelBackend {
 public:
  explicit TinyTransformer(TinyTransformerConfig config);

  const TinyTransformerConfig& config() const { return config_; }
  const TinyWeights& weights() const { return weights_; }

  int vocab_size() const override { return config_.vocab_size; }
  int num_layers() const override { return config_.layers; }
  int max_draft_heads() const override { return config_.draft_heads; }

  std::unique_ptr<SequenceState> prefill(std::span<const TokenId> prompt) const override;
  HeadPredictions draft(const SequenceState& state, int num_heads, int topk) const override;
  ForwardOutput forward_tree(const SequenceState& state, const TokenTree& tree, const TreeMask& mask,
                             const ForwardOptions& options, const PruneCallback& on_prune) const override;
  void commit(SequenceState& state, const ForwardOutput& out, std::span<const NodeIndex> accepted,
              TokenId bonus) const override;

 private:
  TinyTransformerConfig config_;
  TinyWeights weights_;
};

}  // namespace treedec
