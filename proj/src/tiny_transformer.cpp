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

#include "treedec/tiny_transformer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "treedec/verification.hpp"

namespace treedec {

namespace {

using Vec = std::vector<float>;

class TinyState final : public SequenceState {
 public:
  TinyState(int layers, std::span<const TokenId> prompt) : k(layers), v(layers) {
    tokens_.assign(prompt.begin(), prompt.end());
  }
  void push(TokenId t) { tokens_.push_back(t); }
  std::size_t cached() const { return tokens_.size() - 1; }

  std::vector<Vec> k, v;  // per layer, cached() x hidden
  Vec draft_hidden;       // final hidden state of the token before the root
};

struct RowCache {
  std::vector<Vec> k, v;  // per evaluated layer
  Vec final_hidden;
};

class TinyScratch final : public ForwardScratch {
 public:
  std::vector<RowCache> rows;  // row 0 is the root, row i+1 is out.tree node i
};

Vec random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, float stddev) {
  std::normal_distribution<float> dist(0.0f, stddev);
  Vec m(rows * cols);
  for (auto& x : m) x = dist(rng);
  return m;
}

// out = x * W for a row vector x and a [in x out] matrix W.
void matvec(const Vec& x, const Vec& w, std::size_t out_dim, Vec& out) {
  out.assign(out_dim, 0.0f);
  const std::size_t in_dim = x.size();
  for (std::size_t i = 0; i < in_dim; ++i) {
    const float xi = x[i];
    const float* row = w.data() + i * out_dim;
    for (std::size_t j = 0; j < out_dim; ++j) out[j] += xi * row[j];
  }
}

Vec rms_norm(const Vec& x) {
  double ss = 0.0;
  for (float e : x) ss += static_cast<double>(e) * e;
  const float inv = static_cast<float>(1.0 / std::sqrt(ss / static_cast<double>(x.size()) + 1e-6));
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv;
  return out;
}

float gelu(float x) {
  constexpr float kC = 0.7978845608028654f;  // sqrt(2 / pi)
  return 0.5f * x * (1.0f + std::tanh(kC * (x + 0.044715f * x * x * x)));
}

struct Dims {
  std::size_t hidden, heads, head_dim, mlp;
};

// One decoder layer over a set of rows. Row r attends to `cache_len` cached
// positions followed by the rows in visible[r] (ascending position order,
// ending with r itself). Keys and values of every row are written to
// `row_k` / `row_v` before any attention is computed.
void layer_forward(const TinyLayerWeights& w, const Dims& dims, const Vec& cache_k, const Vec& cache_v,
                   std::size_t cache_len, std::vector<Vec>& xs, const std::vector<std::vector<std::size_t>>& visible,
                   std::vector<Vec>& row_k, std::vector<Vec>& row_v) {
  const std::size_t n = xs.size();
  const std::size_t h = dims.hidden;
  std::vector<Vec> qs(n);
  row_k.assign(n, {});
  row_v.assign(n, {});
  for (std::size_t r = 0; r < n; ++r) {
    const Vec normed = rms_norm(xs[r]);
    matvec(normed, w.wq, h, qs[r]);
    matvec(normed, w.wk, h, row_k[r]);
    matvec(normed, w.wv, h, row_v[r]);
  }
  const float scale = 1.0f / std::sqrt(static_cast<float>(dims.head_dim));
  std::vector<const float*> keys, vals;
  std::vector<float> scores;
  Vec attn(h), proj, hidden, mlp_out;
  for (std::size_t r = 0; r < n; ++r) {
    keys.clear();
    vals.clear();
    for (std::size_t j = 0; j < cache_len; ++j) {
      keys.push_back(cache_k.data() + j * h);
      vals.push_back(cache_v.data() + j * h);
    }
    for (std::size_t j : visible[r]) {
      keys.push_back(row_k[j].data());
      vals.push_back(row_v[j].data());
    }
    scores.resize(keys.size());
    std::fill(attn.begin(), attn.end(), 0.0f);
    for (std::size_t a = 0; a < dims.heads; ++a) {
      const std::size_t off = a * dims.head_dim;
      float mx = -INFINITY;
      for (std::size_t j = 0; j < keys.size(); ++j) {
        float s = 0.0f;
        for (std::size_t e = 0; e < dims.head_dim; ++e) s += qs[r][off + e] * keys[j][off + e];
        scores[j] = s * scale;
        mx = std::max(mx, scores[j]);
      }
      float denom = 0.0f;
      for (std::size_t j = 0; j < keys.size(); ++j) {
        scores[j] = std::exp(scores[j] - mx);
        denom += scores[j];
      }
      for (std::size_t j = 0; j < keys.size(); ++j) {
        const float p = scores[j] / denom;
        for (std::size_t e = 0; e < dims.head_dim; ++e) attn[off + e] += p * vals[j][off + e];
      }
    }
    matvec(attn, w.wo, h, proj);
    Vec& x = xs[r];
    for (std::size_t e = 0; e < h; ++e) x[e] += proj[e];
    matvec(rms_norm(x), w.w1, dims.mlp, hidden);
    for (std::size_t e = 0; e < dims.mlp; ++e) hidden[e] = gelu(hidden[e] + w.b1[e]);
    matvec(hidden, w.w2, h, mlp_out);
    for (std::size_t e = 0; e < h; ++e) x[e] += mlp_out[e] + w.b2[e];
  }
}

std::vector<std::vector<std::size_t>> visibility(const TreeMask& mask) {
  // Row 0 is the root; tree node i is row i+1 and sees the root first.
  std::vector<std::vector<std::size_t>> vis(mask.size() + 1);
  vis[0] = {0};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    vis[i + 1].push_back(0);
    for (std::size_t j = 0; j <= i; ++j) {
      if (mask(i, j)) vis[i + 1].push_back(j + 1);
    }
  }
  return vis;
}

const TinyState& as_tiny(const SequenceState& s) {
  const auto* t = dynamic_cast<const TinyState*>(&s);
  if (!t) throw std::invalid_argument("sequence state does not belong to a TinyTransformer");
  return *t;
}

}  // namespace

TinyTransformer::TinyTransformer(TinyTransformerConfig config) : config_(config) {
  const auto& c = config_;
  if (c.vocab_size < 2 || c.hidden < 1 || c.layers < 1 || c.attention_heads < 1 || c.mlp_width < 1 ||
      c.max_positions < 2 || c.draft_heads < 0 || c.hidden % c.attention_heads != 0) {
    throw std::invalid_argument("invalid tiny transformer dimensions");
  }
  const auto v = static_cast<std::size_t>(c.vocab_size);
  const auto h = static_cast<std::size_t>(c.hidden);
  const auto f = static_cast<std::size_t>(c.mlp_width);
  const float sh = 1.0f / std::sqrt(static_cast<float>(h));
  const float sf = 1.0f / std::sqrt(static_cast<float>(f));
  std::mt19937_64 rng(c.seed);
  weights_.token_embedding = random_matrix(rng, v, h, 1.0f);
  weights_.position_embedding = random_matrix(rng, static_cast<std::size_t>(c.max_positions), h, 0.5f);
  for (int l = 0; l < c.layers; ++l) {
    TinyLayerWeights lw;
    lw.wq = random_matrix(rng, h, h, sh);
    lw.wk = random_matrix(rng, h, h, sh);
    lw.wv = random_matrix(rng, h, h, sh);
    lw.wo = random_matrix(rng, h, h, sh);
    lw.w1 = random_matrix(rng, h, f, sh);
    lw.b1 = random_matrix(rng, 1, f, 0.02f);
    lw.w2 = random_matrix(rng, f, h, sf);
    lw.b2 = random_matrix(rng, 1, h, 0.02f);
    weights_.layers.push_back(std::move(lw));
  }
  weights_.lm_head = random_matrix(rng, h, v, sh);
  weights_.early_head = random_matrix(rng, h, v, sh);
  for (int d = 0; d < c.draft_heads; ++d) {
    Vec noise = random_matrix(rng, h, v, sh);
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = weights_.lm_head[i] + c.draft_noise * noise[i];
    weights_.draft.push_back(std::move(noise));
  }
}

std::unique_ptr<SequenceState> TinyTransformer::prefill(std::span<const TokenId> prompt) const {
  if (prompt.empty()) throw std::invalid_argument("prompt must not be empty");
  if (static_cast<int>(prompt.size()) > config_.max_positions) throw std::invalid_argument("prompt too long");
  for (TokenId t : prompt) {
    if (t < 0 || t >= config_.vocab_size) throw std::invalid_argument("prompt token outside the vocabulary");
  }
  auto state = std::make_unique<TinyState>(config_.layers, prompt);
  const auto h = static_cast<std::size_t>(config_.hidden);
  const Dims dims{h, static_cast<std::size_t>(config_.attention_heads),
                  h / static_cast<std::size_t>(config_.attention_heads),
                  static_cast<std::size_t>(config_.mlp_width)};
  state->draft_hidden.assign(h, 0.0f);
  const std::vector<std::vector<std::size_t>> self_only{{0}};
  for (std::size_t p = 0; p + 1 < prompt.size(); ++p) {
    std::vector<Vec> xs(1, Vec(h));
    for (std::size_t e = 0; e < h; ++e) {
      xs[0][e] = weights_.token_embedding[static_cast<std::size_t>(prompt[p]) * h + e] +
                 weights_.position_embedding[p * h + e];
    }
    for (int l = 0; l < config_.layers; ++l) {
      std::vector<Vec> rk, rv;
      auto& ck = state->k[static_cast<std::size_t>(l)];
      auto& cv = state->v[static_cast<std::size_t>(l)];
      layer_forward(weights_.layers[static_cast<std::size_t>(l)], dims, ck, cv, p, xs, self_only, rk, rv);
      ck.insert(ck.end(), rk[0].begin(), rk[0].end());
      cv.insert(cv.end(), rv[0].begin(), rv[0].end());
    }
    state->draft_hidden = rms_norm(xs[0]);
  }
  return state;
}

HeadPredictions TinyTransformer::draft(const SequenceState& state, int num_heads, int topk) const {
  const TinyState& s = as_tiny(state);
  if (num_heads > config_.draft_heads) throw std::invalid_argument("more draft heads requested than the model has");
  HeadPredictions preds;
  Vec logits;
  for (int d = 0; d < num_heads; ++d) {
    matvec(s.draft_hidden, weights_.draft[static_cast<std::size_t>(d)], static_cast<std::size_t>(config_.vocab_size),
           logits);
    std::vector<ScoredToken> list;
    for (TokenId t : topk_indices(logits, topk)) list.push_back({t, logits[static_cast<std::size_t>(t)]});
    preds.heads.push_back(std::move(list));
  }
  return preds;
}

ForwardOutput TinyTransformer::forward_tree(const SequenceState& state, const TokenTree& tree, const TreeMask& mask,
                                            const ForwardOptions& options, const PruneCallback& on_prune) const {
  const TinyState& s = as_tiny(state);
  if (mask.size() != tree.size()) throw TreeError("mask does not match the tree");
  if (options.prune && (options.prune_layer < 1 || options.prune_layer >= config_.layers)) {
    throw std::invalid_argument("prune layer must lie strictly inside the backbone");
  }
  const auto h = static_cast<std::size_t>(config_.hidden);
  const auto vocab = static_cast<std::size_t>(config_.vocab_size);
  const Dims dims{h, static_cast<std::size_t>(config_.attention_heads),
                  h / static_cast<std::size_t>(config_.attention_heads),
                  static_cast<std::size_t>(config_.mlp_width)};
  const std::size_t cache_len = s.cached();
  const std::size_t root_pos = cache_len;
  if (root_pos + static_cast<std::size_t>(tree.max_depth()) >= static_cast<std::size_t>(config_.max_positions)) {
    throw std::invalid_argument("sequence exceeds the positional table");
  }

  // Row 0 is the root, row i+1 is tree node i.
  std::vector<Vec> xs(tree.size() + 1, Vec(h));
  auto embed = [&](std::size_t row, TokenId token, std::size_t pos) {
    for (std::size_t e = 0; e < h; ++e) {
      xs[row][e] = weights_.token_embedding[static_cast<std::size_t>(token) * h + e] +
                   weights_.position_embedding[pos * h + e];
    }
  };
  embed(0, s.root_token(), root_pos);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    embed(i + 1, tree.nodes()[i].token, root_pos + static_cast<std::size_t>(tree.nodes()[i].depth));
  }

  ForwardOutput out;
  out.tree = tree;
  out.decision = keep_all(tree);
  auto scratch = std::make_shared<TinyScratch>();
  std::vector<RowCache>& rows = scratch->rows;
  rows.assign(xs.size(), RowCache{});
  auto vis = visibility(mask);
  TreeMask current_mask = mask;

  for (int l = 0; l < config_.layers; ++l) {
    std::vector<Vec> rk, rv;
    layer_forward(weights_.layers[static_cast<std::size_t>(l)], dims, s.k[static_cast<std::size_t>(l)],
                  s.v[static_cast<std::size_t>(l)], cache_len, xs, vis, rk, rv);
    for (std::size_t r = 0; r < xs.size(); ++r) {
      rows[r].k.push_back(std::move(rk[r]));
      rows[r].v.push_back(std::move(rv[r]));
    }
    if (!(options.prune && l + 1 == options.prune_layer)) continue;

    std::vector<std::vector<TokenId>> early(out.tree.size());
    Vec logits;
    for (std::size_t i = 0; i < out.tree.size(); ++i) {
      matvec(rms_norm(xs[i + 1]), weights_.early_head, vocab, logits);
      early[i] = topk_indices(logits, options.early_topk);
    }
    out.decision = on_prune(out.tree, early);
    auto [pruned_tree, pruned_mask] = apply_decision(out.tree, current_mask, out.decision);
    std::vector<Vec> kept_x{std::move(xs[0])};
    std::vector<RowCache> kept_rows{std::move(rows[0])};
    for (NodeIndex sidx : out.decision.survivors) {
      kept_x.push_back(std::move(xs[static_cast<std::size_t>(sidx) + 1]));
      kept_rows.push_back(std::move(rows[static_cast<std::size_t>(sidx) + 1]));
    }
    xs = std::move(kept_x);
    rows = std::move(kept_rows);
    out.tree = std::move(pruned_tree);
    current_mask = std::move(pruned_mask);
    vis = visibility(current_mask);
  }

  Vec logits;
  out.argmax.resize(out.tree.size());
  for (std::size_t r = 0; r < xs.size(); ++r) {
    rows[r].final_hidden = rms_norm(xs[r]);
    matvec(rows[r].final_hidden, weights_.lm_head, vocab, logits);
    const TokenId best = argmax(logits);
    if (r == 0) {
      out.root_argmax = best;
      if (options.want_logits) out.root_logits = logits;
    } else {
      out.argmax[r - 1] = best;
      if (options.want_logits) out.logits.push_back(logits);
    }
  }
  out.scratch = std::move(scratch);
  return out;
}

void TinyTransformer::commit(SequenceState& state, const ForwardOutput& out, std::span<const NodeIndex> accepted,
                             TokenId bonus) const {
  auto* s = dynamic_cast<TinyState*>(&state);
  if (!s) throw std::invalid_argument("sequence state does not belong to a TinyTransformer");
  const auto* scratch = dynamic_cast<const TinyScratch*>(out.scratch.get());
  if (!scratch) throw std::invalid_argument("forward output does not come from a TinyTransformer");
  check_accepted_chain(out.tree, accepted);
  if (bonus < 0 || bonus >= config_.vocab_size) throw std::invalid_argument("bonus token outside the vocabulary");

  auto append_row = [&](const RowCache& row) {
    for (int l = 0; l < config_.layers; ++l) {
      const auto li = static_cast<std::size_t>(l);
      s->k[li].insert(s->k[li].end(), row.k[li].begin(), row.k[li].end());
      s->v[li].insert(s->v[li].end(), row.v[li].begin(), row.v[li].end());
    }
  };
  append_row(scratch->rows[0]);
  const RowCache* last = &scratch->rows[0];
  for (NodeIndex i : accepted) {
    last = &scratch->rows[static_cast<std::size_t>(i) + 1];
    append_row(*last);
    s->push(out.tree.node(i).token);
  }
  s->draft_hidden = last->final_hidden;
  s->push(bonus);
}

}  // namespace treedec
