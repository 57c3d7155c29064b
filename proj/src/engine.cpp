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

#include "treedec/engine.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "treedec/verification.hpp"

namespace treedec {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kAutoregressive: return "autoregressive";
    case Mode::kStaticTree: return "static_tree";
    case Mode::kPruneOnly: return "prune_only";
    case Mode::kDynamicOnly: return "dynamic_only";
    case Mode::kFull: return "propd_full";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(const std::string& s) {
  for (Mode m : {Mode::kAutoregressive, Mode::kStaticTree, Mode::kPruneOnly, Mode::kDynamicOnly, Mode::kFull}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

bool uses_pruning(Mode m) { return m == Mode::kPruneOnly || m == Mode::kFull; }
bool uses_dynamic_tree(Mode m) { return m == Mode::kDynamicOnly || m == Mode::kFull; }

namespace {

AcceptanceStats initial_stats(const EngineConfig& c) {
  if (c.acceptance_prior.empty()) return AcceptanceStats(c.num_heads, c.topk, c.acceptance_alpha, c.acceptance_warmup);
  if (static_cast<int>(c.acceptance_prior.size()) != c.num_heads ||
      static_cast<int>(c.acceptance_prior.front().size()) != c.topk) {
    throw std::invalid_argument("acceptance prior must be num_heads x topk");
  }
  return AcceptanceStats(c.acceptance_prior, c.acceptance_alpha, c.acceptance_warmup);
}

}  // namespace

Engine::Engine(const ModelBackend& backend, EngineConfig config, LatencyModel* clock)
    : backend_(backend),
      config_(std::move(config)),
      clock_(clock),
      stats_(initial_stats(config_)),
      cost_(config_.scheduler.size_candidates, config_.cost) {
  if (config_.mode != Mode::kAutoregressive && config_.num_heads > backend_.max_draft_heads()) {
    throw std::invalid_argument("engine asks for more draft heads than the backend provides");
  }
  if (uses_pruning(config_.mode)) {
    if (config_.prune.layer < 1 || config_.prune.layer >= backend_.num_layers()) {
      throw std::invalid_argument("prune layer must lie strictly inside the backbone");
    }
    if (config_.prune.topk < 1) throw std::invalid_argument("prune topk must be >= 1");
  }
  if (uses_dynamic_tree(config_.mode) && usable_sizes().empty()) {
    throw std::invalid_argument("no candidate tree size fits the draft grid");
  }
  if (config_.mode == Mode::kStaticTree || config_.mode == Mode::kPruneOnly) {
    if (!config_.static_tree.paths.empty()) {
      for (const auto& p : config_.static_tree.paths) {
        static_selection_.nodes.push_back({p, path_contribution(stats_, p)});
        static_selection_.expected_length += static_selection_.nodes.back().weight;
      }
    } else {
      const int sizes[] = {config_.static_tree.size};
      auto sel = select_best_nodes(stats_, sizes);
      if (!sel.contains(config_.static_tree.size)) {
        throw std::invalid_argument("static tree size exceeds the draft grid");
      }
      static_selection_ = std::move(sel.at(config_.static_tree.size));
    }
  }
}

std::vector<int> Engine::usable_sizes() const {
  const long capacity = grid_capacity(config_.num_heads, config_.topk);
  std::vector<int> out;
  for (int s : cost_.sizes()) {
    if (s >= 1 && s <= capacity) out.push_back(s);
  }
  return out;
}

void Engine::start_batch(const std::vector<std::vector<TokenId>>& prompts, int max_new_tokens) {
  if (max_new_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  seqs_.clear();
  max_new_tokens_ = max_new_tokens;
  for (const auto& p : prompts) {
    Sequence s;
    s.state = backend_.prefill(p);
    s.tokens = p;
    s.prompt_length = p.size();
    seqs_.push_back(std::move(s));
  }
}

bool Engine::active() const {
  return std::any_of(seqs_.begin(), seqs_.end(), [](const Sequence& s) { return !s.finished; });
}

std::vector<std::vector<TokenId>> Engine::transcripts() const {
  std::vector<std::vector<TokenId>> out;
  for (const auto& s : seqs_) {
    out.emplace_back(s.tokens.begin() + static_cast<std::ptrdiff_t>(s.prompt_length), s.tokens.end());
  }
  return out;
}

const TreeSelection& Engine::plan_tree(int batch, double mean_seqlen, DecodeMetrics& m) {
  const RuntimeSnapshot snap{iteration_, batch, mean_seqlen};
  const ReplanTrigger trigger = should_replan(snap, last_plan_, config_.scheduler);
  if (trigger != ReplanTrigger::kNone) {
    last_plan_ = snap;
    // A new batch size moves the whole latency line: relearn it by probing
    // every candidate size once before trusting the fit.
    if (trigger == ReplanTrigger::kInitial || trigger == ReplanTrigger::kBatch) {
      cost_.reset();
      const auto sizes = usable_sizes();
      probes_.assign(sizes.begin(), sizes.end());
    }
    plan_due_ = true;
    pending_trigger_ = trigger;
  }
  if (!probes_.empty()) {
    const int sizes[] = {probes_.front()};
    probes_.pop_front();
    dynamic_selection_ = std::move(select_best_nodes(stats_, sizes).at(sizes[0]));
    dynamic_size_ = sizes[0];
    m.probe = true;
    return dynamic_selection_;
  }
  if (plan_due_) {
    cost_.refit(iteration_);
    const auto sizes = usable_sizes();
    auto best = select_best_nodes(stats_, sizes);
    std::map<int, double> curve;
    for (const auto& [size, sel] : best) curve[size] = sel.expected_length;
    const SizeChoice choice = choose_size(curve, cost_.current(), config_.scheduler.count_bonus);
    dynamic_size_ = choice.size;
    dynamic_selection_ = std::move(best.at(choice.size));
    PlanEvent ev;
    ev.iteration = iteration_;
    ev.trigger = pending_trigger_;
    ev.chosen_size = choice.size;
    ev.speed = choice.speed;
    if (cost_.has_fit()) ev.fit = cost_.current();
    plans_.push_back(std::move(ev));
    m.replanned = true;
    plan_due_ = false;
  }
  return dynamic_selection_;
}

void Engine::resolve_pending(Sequence& seq) {
  const int heads = config_.num_heads;
  std::vector<std::optional<TokenId>> realized(static_cast<std::size_t>(heads));
  for (auto& p : seq.pending) {
    std::fill(realized.begin(), realized.end(), std::nullopt);
    bool any = false;
    while (p.next_head <= heads && p.root_index + static_cast<std::size_t>(p.next_head) < seq.tokens.size()) {
      realized[static_cast<std::size_t>(p.next_head - 1)] = seq.tokens[p.root_index + static_cast<std::size_t>(p.next_head)];
      ++p.next_head;
      any = true;
    }
    if (any) update_stats(stats_, realized, p.predictions);
  }
  while (!seq.pending.empty() && seq.pending.front().next_head > heads) seq.pending.pop_front();
  if (seq.finished) seq.pending.clear();
}

DecodeMetrics Engine::step() {
  std::vector<Sequence*> live;
  for (auto& s : seqs_) {
    if (!s.finished) live.push_back(&s);
  }
  if (live.empty()) throw std::logic_error("step() called without an active sequence");

  const auto wall_start = std::chrono::steady_clock::now();
  DecodeMetrics m;
  m.iteration = iteration_;
  m.batch = static_cast<int>(live.size());
  for (const Sequence* s : live) {
    m.mean_seqlen += static_cast<double>(s->tokens.size());
    m.max_seqlen = std::max(m.max_seqlen, static_cast<int>(s->tokens.size()));
  }
  m.mean_seqlen /= m.batch;

  const bool drafting = config_.mode != Mode::kAutoregressive;
  const bool pruning = uses_pruning(config_.mode);
  static const TreeSelection kNoTree;
  const TreeSelection* selection = &kNoTree;
  if (uses_dynamic_tree(config_.mode)) {
    selection = &plan_tree(m.batch, m.mean_seqlen, m);
  } else if (drafting) {
    selection = &static_selection_;
  }
  m.tree_size = static_cast<int>(selection->nodes.size());

  ForwardOptions options;
  options.prune = pruning && m.tree_size > 0;
  options.prune_layer = config_.prune.layer;
  options.early_topk = config_.prune.topk;
  const PruneCallback on_prune = [this](const TokenTree& tree, std::span<const std::vector<TokenId>> early) {
    return prune(tree, early, config_.prune);
  };

  double effective = 0.0;
  for (Sequence* s : live) {
    HeadPredictions preds;
    if (drafting) preds = backend_.draft(*s->state, config_.num_heads, config_.topk);
    const TokenTree tree = m.tree_size > 0 ? build_tree(s->state->root_token(), preds, selection->nodes)
                                           : TokenTree(s->state->root_token());
    const TreeMask& mask = masks_.get(tree);
    ForwardOutput out = backend_.forward_tree(*s->state, tree, mask, options, on_prune);
    const VerifyResult v = verify(out.tree, out.argmax, out.root_argmax);

    const auto survived = static_cast<double>(out.tree.size());
    m.mean_survived += survived;
    m.prune_rate += out.decision.prune_rate;
    m.mean_accepted += v.accepted_length();
    effective += effective_nodes(m.tree_size, survived, options.prune ? config_.prune.layer : 0, backend_.num_layers());

    const std::size_t root_index = s->tokens.size() - 1;
    std::vector<TokenId> fresh;
    for (NodeIndex i : v.accepted) fresh.push_back(out.tree.node(i).token);
    fresh.push_back(v.bonus);
    for (TokenId t : fresh) {
      s->tokens.push_back(t);
      ++m.tokens;
      if (s->tokens.size() - s->prompt_length >= static_cast<std::size_t>(max_new_tokens_) ||
          (config_.eos_token && t == *config_.eos_token)) {
        s->finished = true;
        break;
      }
    }
    if (!s->finished) backend_.commit(*s->state, out, v.accepted, v.bonus);
    if (drafting) s->pending.push_back({root_index, 1, std::move(preds)});
  }
  m.mean_survived /= m.batch;
  m.prune_rate /= m.batch;
  m.mean_accepted /= m.batch;
  effective /= m.batch;

  if (clock_) {
    m.iteration_time = clock_->sample(m.batch, m.mean_seqlen, effective);
  } else {
    const auto elapsed = std::chrono::steady_clock::now() - wall_start;
    m.iteration_time = std::max(std::chrono::duration<double, std::milli>(elapsed).count(), 1e-6);
  }
  if (uses_dynamic_tree(config_.mode)) cost_.observe(m.tree_size, m.iteration_time, iteration_);
  for (Sequence* s : live) resolve_pending(*s);
  ++iteration_;
  return m;
}

RunResult Engine::run(const std::vector<std::vector<TokenId>>& prompts, int max_new_tokens, int batch_size) {
  if (prompts.empty()) throw std::invalid_argument("run needs at least one prompt");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  RunResult result;
  for (std::size_t begin = 0; begin < prompts.size(); begin += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(prompts.size(), begin + static_cast<std::size_t>(batch_size));
    start_batch(std::vector<std::vector<TokenId>>(prompts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                  prompts.begin() + static_cast<std::ptrdiff_t>(end)),
                max_new_tokens);
    while (active()) result.metrics.push_back(step());
    for (auto& t : transcripts()) result.transcripts.push_back(std::move(t));
  }
  result.plans = plans_;
  result.summary = summarize(result.metrics);
  return result;
}

RunSummary summarize(const std::vector<DecodeMetrics>& metrics) {
  RunSummary s;
  double seq_iters = 0.0, accepted = 0.0, pruned = 0.0, tree_iters = 0.0, tree = 0.0;
  for (const auto& m : metrics) {
    ++s.iterations;
    s.tokens += m.tokens;
    s.total_time += m.iteration_time;
    seq_iters += m.batch;
    accepted += m.mean_accepted * m.batch;
    tree += m.tree_size;
    if (m.tree_size > 0) {
      tree_iters += m.batch;
      pruned += m.prune_rate * m.batch;
    }
  }
  if (s.total_time > 0.0) s.tokens_per_second = static_cast<double>(s.tokens) / (s.total_time / 1000.0);
  if (seq_iters > 0.0) s.mean_accepted = accepted / seq_iters;
  if (tree_iters > 0.0) s.mean_prune_rate = pruned / tree_iters;
  if (s.iterations > 0) s.mean_tree_size = tree / static_cast<double>(s.iterations);
  return s;
}

}  // namespace treedec
