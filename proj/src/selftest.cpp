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

#include "treedec/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "treedec/engine.hpp"
#include "treedec/latency_model.hpp"
#include "treedec/oracles.hpp"
#include "treedec/synthetic_oracle.hpp"
#include "treedec/tiny_transformer.hpp"

namespace treedec {

namespace {

std::vector<std::vector<double>> reference_curves() {
  return {{0.6, 0.1, 0.05}, {0.45, 0.1, 0.05}, {0.35, 0.08, 0.04}};
}

std::vector<std::vector<TokenId>> random_prompts(std::mt19937_64& rng, int count, int vocab) {
  std::uniform_int_distribution<int> len(2, 10);
  std::uniform_int_distribution<TokenId> tok(0, vocab - 1);
  std::vector<std::vector<TokenId>> out;
  for (int i = 0; i < count; ++i) {
    std::vector<TokenId> p(static_cast<std::size_t>(len(rng)));
    for (auto& t : p) t = tok(rng);
    out.push_back(std::move(p));
  }
  return out;
}

// Ancestor-closed survivor set: a node survives with probability 0.7 when
// its parent survived. Depth-1 nodes are kept, as in Top-K pruning.
std::vector<NodeIndex> random_survivors(std::mt19937_64& rng, const TokenTree& tree) {
  std::bernoulli_distribution keep(0.7);
  std::vector<bool> alive(tree.size());
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const NodeIndex p = tree.nodes()[i].parent;
    alive[i] = p == kRootParent || (alive[static_cast<std::size_t>(p)] && keep(rng));
    if (alive[i]) out.push_back(static_cast<NodeIndex>(i));
  }
  return out;
}

}  // namespace

SuiteResult suite_losslessness(std::uint64_t seed) {
  SuiteResult r{"losslessness", true, ""};
  std::mt19937_64 rng(seed);
  SyntheticOracleConfig oc;
  oc.vocab_size = 500;
  oc.layers = 8;
  oc.seed = seed;
  oc.head_rank_probs = reference_curves();
  oc.early_quality = {0.8};
  TinyTransformerConfig tc;
  tc.vocab_size = 64;
  tc.hidden = 32;
  tc.mlp_width = 64;
  tc.layers = 3;
  tc.draft_heads = 3;
  tc.seed = seed;
  tc.draft_noise = 0.3f;
  const SyntheticOracle oracle_backend(oc);
  const TinyTransformer tiny(tc);

  int compared = 0, mismatched = 0;
  for (const ModelBackend* backend : {static_cast<const ModelBackend*>(&oracle_backend),
                                      static_cast<const ModelBackend*>(&tiny)}) {
    const auto prompts = random_prompts(rng, 20, backend->vocab_size());
    const int max_new = 12;
    std::vector<std::vector<TokenId>> expected;
    for (const auto& p : prompts) expected.push_back(oracle::greedy_decode(*backend, p, max_new));
    for (Mode mode : {Mode::kAutoregressive, Mode::kStaticTree, Mode::kPruneOnly, Mode::kDynamicOnly, Mode::kFull}) {
      EngineConfig ec;
      ec.mode = mode;
      ec.num_heads = 3;
      ec.topk = 3;
      ec.static_tree.size = 8;
      ec.prune.layer = 1;
      ec.prune.topk = 4;
      ec.scheduler.size_candidates = {1, 2, 4, 8, 16};
      LatencyModel clock(LatencyConfig{});
      Engine engine(*backend, ec, &clock);
      const RunResult res = engine.run(prompts, max_new, 4);
      for (std::size_t i = 0; i < prompts.size(); ++i) {
        ++compared;
        if (res.transcripts[i] != expected[i]) ++mismatched;
      }
    }
  }
  r.passed = mismatched == 0;
  r.detail = std::to_string(compared - mismatched) + "/" + std::to_string(compared) + " transcripts match greedy decoding";
  return r;
}

SuiteResult suite_mask_subsample(std::uint64_t seed, const MaskSubsampler& subsample) {
  SuiteResult r{"mask_subsample", true, ""};
  std::mt19937_64 rng(seed);
  long cases = 0, failures = 0;
  auto check = [&](const TokenTree& tree, std::span<const NodeIndex> survivors) {
    ++cases;
    bool ok = false;
    try {
      ok = subsample(make_mask(tree), survivors) == oracle::rebuilt_mask(tree, survivors);
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) ++failures;
  };
  for (const auto& paths : oracle::closed_subsets(3, 2, 5)) {
    const TokenTree tree = oracle::tree_from_paths(0, paths);
    const auto n = tree.size();
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
      std::vector<NodeIndex> survivors;
      bool closed = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(bits >> i & 1u)) continue;
        const NodeIndex p = tree.nodes()[i].parent;
        if (p != kRootParent && !(bits >> p & 1u)) closed = false;
        survivors.push_back(static_cast<NodeIndex>(i));
      }
      if (closed) check(tree, survivors);
    }
  }
  std::uniform_int_distribution<int> size(6, 30);
  for (int t = 0; t < 100; ++t) {
    const TokenTree tree = oracle::tree_from_paths(0, oracle::random_closed_subset(rng, 4, 3, size(rng)));
    check(tree, random_survivors(rng, tree));
  }
  r.passed = failures == 0;
  r.detail = std::to_string(cases - failures) + "/" + std::to_string(cases) + " subsampled masks match rebuilt masks";
  return r;
}

SuiteResult suite_regression_recovery(std::uint64_t seed) {
  SuiteResult r{"regression_recovery", true, ""};
  std::vector<int> sizes;
  for (int s = 1; s <= 64; ++s) sizes.push_back(s);
  std::ostringstream detail;
  for (double noise : {0.05, 0.0}) {
    LatencyConfig lc;
    lc.c0 = 3.0;
    lc.c1 = 0.2;
    lc.noise = noise;
    lc.seed = seed;
    LatencyModel clock(lc);
    CostModel cost(sizes, CostModelConfig{});
    std::mt19937_64 rng(seed ^ 0x5eedULL);
    std::uniform_int_distribution<std::size_t> pick(0, sizes.size() - 1);
    for (long i = 0; i < 100; ++i) {
      const int s = sizes[pick(rng)];
      cost.observe(s, clock.sample(1, 0.0, s), i);
    }
    const auto fit = cost.fit(100);
    const double tol = noise > 0 ? 0.02 : 1e-9;
    const bool ok = fit && std::abs(fit->beta0 - 3.0) <= tol * 3.0 && std::abs(fit->beta1 - 0.2) <= tol * 0.2;
    r.passed = r.passed && ok;
    detail << "noise " << noise << ": ";
    if (fit) {
      detail << "beta0=" << fit->beta0 << " beta1=" << fit->beta1 << (ok ? " " : " (out of tolerance) ");
    } else {
      detail << "no fit ";
    }
  }
  r.detail = detail.str();
  return r;
}

SuiteResult suite_estimator_convergence(std::uint64_t seed) {
  SuiteResult r{"estimator_convergence", true, ""};
  SyntheticOracleConfig oc;
  oc.vocab_size = 500;
  oc.layers = 8;
  oc.seed = seed;
  oc.head_rank_probs = reference_curves();
  const SyntheticOracle backend(oc);
  EngineConfig ec;
  ec.mode = Mode::kStaticTree;
  ec.num_heads = 3;
  ec.topk = 3;
  ec.static_tree.size = 1;
  ec.acceptance_alpha = 1e-4;
  ec.acceptance_warmup = true;
  LatencyModel clock(LatencyConfig{});
  Engine engine(backend, ec, &clock);
  std::mt19937_64 rng(seed);
  const long iterations = 3000;
  while (engine.iteration() < iterations) {
    engine.start_batch(random_prompts(rng, 1, oc.vocab_size), 200);
    while (engine.active() && engine.iteration() < iterations) engine.step();
  }
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d) {
    for (int k = 1; k <= 3; ++k) {
      worst = std::max(worst, std::abs(engine.acceptance().cumulative(d, k) - backend.true_cumulative(d, k)));
    }
  }
  const auto grid = oracle::grid_paths(3, 3);
  double predicted = 0.0;
  for (const auto& p : grid) predicted += path_contribution(engine.acceptance(), p);
  const double measured = oracle::measured_tree_length(backend, grid, 3, 3, 20000, seed + 1);
  const double rel = std::abs(predicted - measured) / measured;
  r.passed = worst < 0.03 && rel < 0.03;
  std::ostringstream detail;
  detail << "max |P-P*| = " << worst << ", expected length " << predicted << " vs measured " << measured;
  r.detail = detail.str();
  return r;
}

std::vector<SuiteResult> run_selftest(std::uint64_t seed) {
  return {suite_losslessness(seed), suite_mask_subsample(seed), suite_regression_recovery(seed),
          suite_estimator_convergence(seed)};
}

void print_results(std::ostream& os, const std::vector<SuiteResult>& results) {
  for (const auto& r : results) os << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
}

}  // namespace treedec
