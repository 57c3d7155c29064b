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

#include "treedec/synthetic_oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "treedec/rng.hpp"

namespace treedec {

namespace {

enum Purpose : std::uint64_t {
  kNext = 1,
  kDraftRank = 2,
  kDraftFill = 3,
  kEarlyPlace = 4,
  kEarlyFill = 5,
};

class OracleState final : public SequenceState {
 public:
  OracleState(std::span<const TokenId> prompt, std::uint64_t h) : hash(h) {
    tokens_.assign(prompt.begin(), prompt.end());
  }
  void push(TokenId t) { tokens_.push_back(t); }
  std::uint64_t hash;  // of the full committed context, root included
};

const OracleState& as_oracle(const SequenceState& s) {
  const auto* o = dynamic_cast<const OracleState*>(&s);
  if (!o) throw std::invalid_argument("sequence state does not belong to a SyntheticOracle");
  return *o;
}

// Pseudo-random permutation j -> (a*j + b) mod V with gcd(a, V) = 1.
class AffinePermutation {
 public:
  AffinePermutation(std::uint64_t key, int vocab) : v_(static_cast<std::uint64_t>(vocab)) {
    a_ = v_ > 1 ? 1 + mix64(key, 1) % (v_ - 1) : 1;
    while (std::gcd(a_, v_) != 1) a_ = a_ % (v_ - 1) + 1;
    b_ = mix64(key, 2) % v_;
  }
  TokenId operator()(std::uint64_t j) const { return static_cast<TokenId>((a_ * j + b_) % v_); }

 private:
  std::uint64_t v_, a_ = 1, b_ = 0;
};

// First `count` tokens of the permutation, skipping `excluded`.
std::vector<TokenId> fill_tokens(std::uint64_t key, int vocab, TokenId excluded, int count) {
  AffinePermutation perm(key, vocab);
  std::vector<TokenId> out;
  for (std::uint64_t j = 0; static_cast<int>(out.size()) < count && j < static_cast<std::uint64_t>(vocab); ++j) {
    const TokenId t = perm(j);
    if (t != excluded) out.push_back(t);
  }
  return out;
}

}  // namespace

SyntheticOracle::SyntheticOracle(SyntheticOracleConfig config) : config_(std::move(config)) {
  if (config_.vocab_size < 2 || config_.layers < 2) throw std::invalid_argument("oracle needs vocab >= 2 and >= 2 layers");
  for (const auto& row : config_.head_rank_probs) {
    double total = 0.0;
    for (double q : row) {
      if (q < 0.0) throw std::invalid_argument("head rank probabilities must be non-negative");
      total += q;
    }
    if (total > 1.0 + 1e-12) throw std::invalid_argument("head rank probabilities sum above 1");
  }
  if (config_.early_quality.empty()) throw std::invalid_argument("early quality needs at least one entry");
  for (double q : config_.early_quality) {
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("early quality must lie in [0, 1]");
  }
}

double SyntheticOracle::true_cumulative(int depth, int rank) const {
  const auto& row = config_.head_rank_probs.at(static_cast<std::size_t>(depth - 1));
  double total = 0.0;
  for (int r = 0; r < rank && r < static_cast<int>(row.size()); ++r) total += row[static_cast<std::size_t>(r)];
  return total;
}

double SyntheticOracle::early_quality(int layer) const {
  const auto& q = config_.early_quality;
  if (q.size() == 1) return q.front();
  return q.at(static_cast<std::size_t>(std::clamp(layer, 1, static_cast<int>(q.size())) - 1));
}

std::uint64_t SyntheticOracle::extend(std::uint64_t hash, TokenId token) const {
  return mix64(hash, static_cast<std::uint64_t>(token) + 1);
}

TokenId SyntheticOracle::next_from_hash(std::uint64_t hash) const {
  return static_cast<TokenId>(mix64(hash, kNext) % static_cast<std::uint64_t>(config_.vocab_size));
}

TokenId SyntheticOracle::next_token(std::span<const TokenId> context) const {
  std::uint64_t h = mix64(config_.seed);
  for (TokenId t : context) h = extend(h, t);
  return next_from_hash(h);
}

std::unique_ptr<SequenceState> SyntheticOracle::prefill(std::span<const TokenId> prompt) const {
  if (prompt.empty()) throw std::invalid_argument("prompt must not be empty");
  std::uint64_t h = mix64(config_.seed);
  for (TokenId t : prompt) {
    if (t < 0 || t >= config_.vocab_size) throw std::invalid_argument("prompt token outside the vocabulary");
    h = extend(h, t);
  }
  return std::make_unique<OracleState>(prompt, h);
}

HeadPredictions SyntheticOracle::draft(const SequenceState& state, int num_heads, int topk) const {
  const OracleState& s = as_oracle(state);
  if (num_heads > max_draft_heads()) throw std::invalid_argument("more draft heads requested than configured");
  const int k = std::min(topk, config_.vocab_size);
  HeadPredictions preds;
  std::uint64_t h = s.hash;
  for (int d = 1; d <= num_heads; ++d) {
    const TokenId truth = next_from_hash(h);
    h = extend(h, truth);
    const std::uint64_t key = mix64(mix64(config_.seed, s.hash), static_cast<std::uint64_t>(d));
    const double u = unit_interval(mix64(key, kDraftRank));
    int rank = 0;  // 0 = absent
    double cum = 0.0;
    const auto& row = config_.head_rank_probs[static_cast<std::size_t>(d - 1)];
    for (int r = 0; r < static_cast<int>(row.size()); ++r) {
      cum += row[static_cast<std::size_t>(r)];
      if (u < cum) {
        rank = r + 1;
        break;
      }
    }
    if (rank > k) rank = 0;
    std::vector<TokenId> tokens = fill_tokens(mix64(key, kDraftFill), config_.vocab_size, truth, rank ? k - 1 : k);
    if (rank) tokens.insert(tokens.begin() + (rank - 1), truth);
    std::vector<ScoredToken> list;
    for (std::size_t i = 0; i < tokens.size(); ++i) list.push_back({tokens[i], static_cast<float>(k - static_cast<int>(i))});
    preds.heads.push_back(std::move(list));
  }
  return preds;
}

std::vector<TokenId> SyntheticOracle::early_list(std::uint64_t node_hash, int layer, int k) const {
  const TokenId successor = next_from_hash(node_hash);
  const std::uint64_t key = mix64(mix64(config_.seed, node_hash), static_cast<std::uint64_t>(layer));
  const bool first = unit_interval(mix64(key, kEarlyPlace)) < early_quality(layer);
  k = std::min(k, config_.vocab_size);
  std::vector<TokenId> out;
  if (first) {
    out.push_back(successor);
    auto rest = fill_tokens(mix64(key, kEarlyFill), config_.vocab_size, successor, k - 1);
    out.insert(out.end(), rest.begin(), rest.end());
  } else {
    out = fill_tokens(mix64(key, kEarlyFill), config_.vocab_size, successor, k);
    if (static_cast<int>(out.size()) < k) out.push_back(successor);
  }
  return out;
}

ForwardOutput SyntheticOracle::forward_tree(const SequenceState& state, const TokenTree& tree, const TreeMask& mask,
                                            const ForwardOptions& options, const PruneCallback& on_prune) const {
  const OracleState& s = as_oracle(state);
  if (mask.size() != tree.size()) throw TreeError("mask does not match the tree");
  if (options.prune && (options.prune_layer < 1 || options.prune_layer >= config_.layers)) {
    throw std::invalid_argument("prune layer must lie strictly inside the backbone");
  }
  std::vector<std::uint64_t> hashes(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const TreeNode& n = tree.nodes()[i];
    const std::uint64_t parent = n.parent == kRootParent ? s.hash : hashes[static_cast<std::size_t>(n.parent)];
    hashes[i] = extend(parent, n.token);
  }

  ForwardOutput out;
  out.root_argmax = next_from_hash(s.hash);
  out.tree = tree;
  out.decision = keep_all(tree);
  if (options.prune) {
    std::vector<std::vector<TokenId>> early(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) early[i] = early_list(hashes[i], options.prune_layer, options.early_topk);
    out.decision = on_prune(tree, early);
    out.tree = apply_decision(tree, mask, out.decision).first;
  }
  for (NodeIndex i : out.decision.survivors) out.argmax.push_back(next_from_hash(hashes[static_cast<std::size_t>(i)]));
  return out;
}

void SyntheticOracle::commit(SequenceState& state, const ForwardOutput& out, std::span<const NodeIndex> accepted,
                             TokenId bonus) const {
  auto* s = dynamic_cast<OracleState*>(&state);
  if (!s) throw std::invalid_argument("sequence state does not belong to a SyntheticOracle");
  check_accepted_chain(out.tree, accepted);
  if (bonus < 0 || bonus >= config_.vocab_size) throw std::invalid_argument("bonus token outside the vocabulary");
  for (NodeIndex i : accepted) {
    const TokenId t = out.tree.node(i).token;
    s->push(t);
    s->hash = extend(s->hash, t);
  }
  s->push(bonus);
  s->hash = extend(s->hash, bonus);
}

}  // namespace treedec
