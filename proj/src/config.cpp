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

#include "treedec/config.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace treedec {

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const int line = node.IsDefined() ? node.Mark().line + 1 : 0;
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

  // Rejects keys outside `allowed`; `where` names the section in messages.
  void expect_map(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) const {
    if (!node.IsMap()) fail(node, where + " must be a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "invalid value '" + node.Scalar() + "' for " + what);
    }
  }

  template <typename T>
  void opt(const YAML::Node& map, const std::string& key, T& out) const {
    if (const auto n = map[key]) out = scalar<T>(n, key);
  }

  template <typename T>
  std::vector<T> list(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + " must be a list");
    std::vector<T> out;
    for (const auto& e : node) out.push_back(scalar<T>(e, what));
    return out;
  }

  std::vector<std::vector<double>> matrix(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be a non-empty list of lists");
    std::vector<std::vector<double>> out;
    for (const auto& row : node) out.push_back(list<double>(row, what));
    return out;
  }

  void positive(const YAML::Node& node, double v, const std::string& what) const {
    if (!(v > 0)) fail(node, what + " must be positive");
  }

 private:
  std::string origin_;
};

LatencyConfig parse_latency(const Reader& r, const YAML::Node& n, std::uint64_t seed) {
  r.expect_map(n, {"c0", "c0_per_batch", "c0_per_token", "c1", "c1_per_batch", "noise", "seed"}, "backend.latency");
  LatencyConfig c;
  c.seed = seed;
  r.opt(n, "c0", c.c0);
  r.opt(n, "c0_per_batch", c.c0_per_batch);
  r.opt(n, "c0_per_token", c.c0_per_token);
  r.opt(n, "c1", c.c1);
  r.opt(n, "c1_per_batch", c.c1_per_batch);
  r.opt(n, "noise", c.noise);
  r.opt(n, "seed", c.seed);
  if (c.noise < 0) r.fail(n["noise"], "noise must be >= 0");
  return c;
}

void parse_backend(const Reader& r, const YAML::Node& n, RunConfig& cfg) {
  r.expect_map(n,
               {"kind", "seed", "vocab_size", "layers", "head_rank_probs", "early_quality", "hidden",
                "attention_heads", "mlp_width", "draft_noise", "max_positions", "clock", "latency"},
               "backend");
  BackendSection& b = cfg.backend;
  const auto kind = n["kind"];
  if (!kind) r.fail(n, "backend.kind is required");
  const auto k = r.scalar<std::string>(kind, "kind");
  if (k == "tiny_transformer") {
    b.kind = BackendKind::kTinyTransformer;
  } else if (k == "synthetic") {
    b.kind = BackendKind::kSynthetic;
  } else {
    r.fail(kind, "backend.kind must be 'tiny_transformer' or 'synthetic'");
  }
  r.opt(n, "seed", b.seed);
  const bool tiny = b.kind == BackendKind::kTinyTransformer;
  auto only = [&](const char* key, bool allowed) {
    if (n[key] && !allowed) r.fail(n[key], std::string(key) + " does not apply to backend kind '" + k + "'");
  };
  only("head_rank_probs", !tiny);
  only("early_quality", !tiny);
  for (const char* key : {"hidden", "attention_heads", "mlp_width", "draft_noise", "max_positions"}) only(key, tiny);

  b.tiny.seed = b.synthetic.seed = b.seed;
  b.synthetic.head_rank_probs.clear();
  int vocab = tiny ? b.tiny.vocab_size : b.synthetic.vocab_size;
  int layers = tiny ? b.tiny.layers : b.synthetic.layers;
  r.opt(n, "vocab_size", vocab);
  r.opt(n, "layers", layers);
  if (vocab < 2) r.fail(n["vocab_size"], "vocab_size must be >= 2");
  if (layers < (tiny ? 1 : 2)) r.fail(n["layers"], "layers too small");
  if (tiny) {
    b.tiny.vocab_size = vocab;
    b.tiny.layers = layers;
    r.opt(n, "hidden", b.tiny.hidden);
    r.opt(n, "attention_heads", b.tiny.attention_heads);
    r.opt(n, "mlp_width", b.tiny.mlp_width);
    r.opt(n, "draft_noise", b.tiny.draft_noise);
    r.opt(n, "max_positions", b.tiny.max_positions);
    if (b.tiny.hidden < 1 || b.tiny.attention_heads < 1 || b.tiny.hidden % b.tiny.attention_heads != 0) {
      r.fail(n, "hidden must be a positive multiple of attention_heads");
    }
  } else {
    b.synthetic.vocab_size = vocab;
    b.synthetic.layers = layers;
    const auto probs = n["head_rank_probs"];
    if (!probs) r.fail(n, "synthetic backend requires head_rank_probs");
    b.synthetic.head_rank_probs = r.matrix(probs, "head_rank_probs");
    for (std::size_t i = 0; i < b.synthetic.head_rank_probs.size(); ++i) {
      double total = 0.0;
      for (double q : b.synthetic.head_rank_probs[i]) {
        if (q < 0) r.fail(probs[i], "head_rank_probs entries must be >= 0");
        total += q;
      }
      if (total > 1.0 + 1e-12) r.fail(probs[i], "head_rank_probs row sums above 1");
    }
    if (const auto eq = n["early_quality"]) {
      b.synthetic.early_quality = eq.IsSequence() ? r.list<double>(eq, "early_quality")
                                                  : std::vector<double>{r.scalar<double>(eq, "early_quality")};
      if (b.synthetic.early_quality.empty()) r.fail(eq, "early_quality must not be empty");
      for (double q : b.synthetic.early_quality) {
        if (q < 0 || q > 1) r.fail(eq, "early_quality values must lie in [0, 1]");
      }
    }
  }
  std::string clock = "simulated";
  r.opt(n, "clock", clock);
  if (clock != "simulated" && clock != "wall") r.fail(n["clock"], "clock must be 'simulated' or 'wall'");
  b.simulated_clock = clock == "simulated";
  b.latency.seed = b.seed;
  if (const auto lat = n["latency"]) b.latency = parse_latency(r, lat, b.seed);
}

void parse_engine(const Reader& r, const YAML::Node& n, RunConfig& cfg) {
  r.expect_map(n, {"mode", "draft_heads", "topk", "eos_token", "prune", "scheduler", "cost", "acceptance", "static_tree"},
               "engine");
  EngineConfig& e = cfg.engine;
  if (const auto m = n["mode"]) {
    const auto mode = parse_mode(r.scalar<std::string>(m, "mode"));
    if (!mode) {
      r.fail(m, "mode must be one of autoregressive, static_tree, prune_only, dynamic_only, propd_full");
    }
    e.mode = *mode;
  }
  r.opt(n, "draft_heads", e.num_heads);
  r.opt(n, "topk", e.topk);
  if (e.num_heads < 1) r.fail(n["draft_heads"], "draft_heads must be >= 1");
  if (e.topk < 1) r.fail(n["topk"], "topk must be >= 1");
  if (const auto eos = n["eos_token"]) e.eos_token = r.scalar<TokenId>(eos, "eos_token");

  if (const auto p = n["prune"]) {
    r.expect_map(p, {"layer", "topk", "criterion"}, "engine.prune");
    r.opt(p, "layer", e.prune.layer);
    r.opt(p, "topk", e.prune.topk);
    if (e.prune.layer < 1) r.fail(p["layer"], "prune.layer must be >= 1");
    if (e.prune.topk < 1) r.fail(p["topk"], "prune.topk must be >= 1");
    if (const auto c = p["criterion"]) {
      const auto name = r.scalar<std::string>(c, "criterion");
      if (name == "probability") r.fail(c, "probability-based pruning is not supported; use 'topk'");
      if (name != "topk") r.fail(c, "prune.criterion must be 'topk'");
    }
  }
  if (const auto s = n["scheduler"]) {
    r.expect_map(s, {"resize_batch_delta", "resize_seqlen_delta", "replan_period", "sizes", "count_bonus"},
                 "engine.scheduler");
    r.opt(s, "resize_batch_delta", e.scheduler.resize_batch_delta);
    r.opt(s, "resize_seqlen_delta", e.scheduler.resize_seqlen_delta);
    r.opt(s, "replan_period", e.scheduler.replan_period);
    r.opt(s, "count_bonus", e.scheduler.count_bonus);
    if (e.scheduler.resize_batch_delta < 1 || e.scheduler.resize_seqlen_delta < 1 || e.scheduler.replan_period < 1) {
      r.fail(s, "scheduler deltas and replan_period must be positive");
    }
    if (const auto sizes = s["sizes"]) {
      e.scheduler.size_candidates = r.list<int>(sizes, "sizes");
      if (e.scheduler.size_candidates.empty()) r.fail(sizes, "sizes must not be empty");
      for (int v : e.scheduler.size_candidates) {
        if (v < 1) r.fail(sizes, "sizes must be positive");
      }
    }
  }
  if (const auto c = n["cost"]) {
    r.expect_map(c, {"alpha", "lambda", "beta0", "beta1"}, "engine.cost");
    r.opt(c, "alpha", e.cost.alpha);
    r.opt(c, "lambda", e.cost.lambda);
    r.opt(c, "beta0", e.cost.prewarm.beta0);
    r.opt(c, "beta1", e.cost.prewarm.beta1);
    if (!(e.cost.alpha > 0 && e.cost.alpha <= 1)) r.fail(c["alpha"], "cost.alpha must be in (0, 1]");
    if (e.cost.lambda < 0) r.fail(c["lambda"], "cost.lambda must be >= 0");
  }
  if (const auto a = n["acceptance"]) {
    r.expect_map(a, {"alpha", "warmup", "prior"}, "engine.acceptance");
    r.opt(a, "alpha", e.acceptance_alpha);
    r.opt(a, "warmup", e.acceptance_warmup);
    if (!(e.acceptance_alpha > 0 && e.acceptance_alpha < 1)) r.fail(a["alpha"], "acceptance.alpha must be in (0, 1)");
    if (const auto prior = a["prior"]) {
      e.acceptance_prior = r.matrix(prior, "prior");
      if (static_cast<int>(e.acceptance_prior.size()) != e.num_heads) {
        r.fail(prior, "prior needs one row per draft head");
      }
      for (std::size_t i = 0; i < e.acceptance_prior.size(); ++i) {
        const auto& row = e.acceptance_prior[i];
        if (static_cast<int>(row.size()) != e.topk) r.fail(prior[i], "prior rows need topk entries");
        double prev = 0.0;
        for (double v : row) {
          if (!(v >= prev && v <= 1.0)) r.fail(prior[i], "prior rows must be non-decreasing within [0, 1]");
          prev = v;
        }
      }
    }
  }
  if (const auto t = n["static_tree"]) {
    r.expect_map(t, {"size", "paths"}, "engine.static_tree");
    r.opt(t, "size", e.static_tree.size);
    if (e.static_tree.size < 1) r.fail(t["size"], "static_tree.size must be >= 1");
    if (const auto paths = t["paths"]) {
      if (!paths.IsSequence()) r.fail(paths, "static_tree.paths must be a list of rank lists");
      for (const auto& p : paths) {
        RankPath rp = r.list<int>(p, "static_tree.paths");
        if (rp.empty() || static_cast<int>(rp.size()) > e.num_heads) r.fail(p, "rank path length must be 1..draft_heads");
        for (int v : rp) {
          if (v < 1 || v > e.topk) r.fail(p, "ranks must lie in 1..topk");
        }
        e.static_tree.paths.push_back(std::move(rp));
      }
    }
  }
}

void parse_workload(const Reader& r, const YAML::Node& n, RunConfig& cfg, const std::string& base_dir) {
  r.expect_map(n, {"prompts", "synthetic", "max_tokens", "batch_size"}, "workload");
  WorkloadSection& w = cfg.workload;
  if (const auto p = n["prompts"]) {
    std::filesystem::path path(r.scalar<std::string>(p, "prompts"));
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    w.prompt_file = path.string();
  }
  if (const auto s = n["synthetic"]) {
    if (n["prompts"]) r.fail(s, "workload takes either prompts or synthetic, not both");
    r.expect_map(s, {"count", "min_length", "max_length", "seed"}, "workload.synthetic");
    r.opt(s, "count", w.synthetic_count);
    r.opt(s, "min_length", w.synthetic_min_length);
    r.opt(s, "max_length", w.synthetic_max_length);
    r.opt(s, "seed", w.synthetic_seed);
    if (w.synthetic_count < 1 || w.synthetic_min_length < 1 || w.synthetic_max_length < w.synthetic_min_length) {
      r.fail(s, "synthetic workload needs count >= 1 and 1 <= min_length <= max_length");
    }
  }
  r.opt(n, "max_tokens", w.max_tokens);
  r.opt(n, "batch_size", w.batch_size);
  if (w.max_tokens < 1) r.fail(n["max_tokens"], "max_tokens must be >= 1");
  if (w.batch_size < 1) r.fail(n["batch_size"], "batch_size must be >= 1");
}

void parse_output(const Reader& r, const YAML::Node& n, RunConfig& cfg) {
  r.expect_map(n, {"transcripts", "metrics", "plans", "summary"}, "output");
  r.opt(n, "transcripts", cfg.output.transcripts);
  r.opt(n, "metrics", cfg.output.metrics);
  r.opt(n, "plans", cfg.output.plans);
  r.opt(n, "summary", cfg.output.summary);
}

void parse_sweep(const Reader& r, const YAML::Node& n, RunConfig& cfg) {
  r.expect_map(n, {"batch", "prune_layer", "prune_topk", "mode"}, "sweep");
  if (const auto v = n["batch"]) cfg.sweep.batch = r.list<int>(v, "sweep.batch");
  if (const auto v = n["prune_layer"]) cfg.sweep.prune_layer = r.list<int>(v, "sweep.prune_layer");
  if (const auto v = n["prune_topk"]) cfg.sweep.prune_topk = r.list<int>(v, "sweep.prune_topk");
  if (const auto v = n["mode"]) {
    if (!v.IsSequence()) r.fail(v, "sweep.mode must be a list");
    for (const auto& e : v) {
      const auto m = parse_mode(r.scalar<std::string>(e, "sweep.mode"));
      if (!m) r.fail(e, "unknown mode in sweep.mode");
      cfg.sweep.mode.push_back(*m);
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  Reader r(origin);
  RunConfig cfg;
  if (!root.IsMap()) r.fail(root, "configuration must be a mapping");
  r.expect_map(root, {"backend", "engine", "workload", "output", "sweep"}, "configuration");
  if (!root["backend"]) r.fail(root, "missing backend section");
  // Engine first: the tiny transformer takes its draft-head count from it.
  if (const auto e = root["engine"]) parse_engine(r, e, cfg);
  parse_backend(r, root["backend"], cfg);
  if (cfg.backend.kind == BackendKind::kTinyTransformer) {
    cfg.backend.tiny.draft_heads = cfg.engine.num_heads;
  } else if (static_cast<int>(cfg.backend.synthetic.head_rank_probs.size()) < cfg.engine.num_heads) {
    r.fail(root["backend"]["head_rank_probs"], "head_rank_probs needs a row for every draft head");
  }
  if (uses_pruning(cfg.engine.mode)) {
    const int layers = cfg.backend.kind == BackendKind::kTinyTransformer ? cfg.backend.tiny.layers
                                                                         : cfg.backend.synthetic.layers;
    if (cfg.engine.prune.layer >= layers) {
      r.fail(root["engine"] ? root["engine"] : root, "prune.layer must be smaller than backend.layers");
    }
  }
  if (const auto w = root["workload"]) parse_workload(r, w, cfg, base_dir);
  if (const auto o = root["output"]) parse_output(r, o, cfg);
  if (const auto s = root["sweep"]) parse_sweep(r, s, cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ":0: cannot read configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), path, dir.empty() ? "." : dir.string());
}

void override_seed(RunConfig& config, std::uint64_t seed) {
  config.backend.seed = seed;
  config.backend.tiny.seed = seed;
  config.backend.synthetic.seed = seed;
  config.backend.latency.seed = seed;
  config.workload.synthetic_seed = seed;
}

std::unique_ptr<ModelBackend> make_backend(const RunConfig& config) {
  if (config.backend.kind == BackendKind::kTinyTransformer) {
    return std::make_unique<TinyTransformer>(config.backend.tiny);
  }
  return std::make_unique<SyntheticOracle>(config.backend.synthetic);
}

std::vector<std::vector<TokenId>> make_prompts(const RunConfig& config) {
  const int vocab = config.backend.kind == BackendKind::kTinyTransformer ? config.backend.tiny.vocab_size
                                                                         : config.backend.synthetic.vocab_size;
  std::vector<std::vector<TokenId>> prompts;
  const auto& w = config.workload;
  if (!w.prompt_file.empty()) {
    std::ifstream in(w.prompt_file);
    if (!in) throw ConfigError(w.prompt_file + ":0: cannot read prompt file");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<TokenId> p;
      std::string tok;
      while (ls >> tok) {
        try {
          std::size_t used = 0;
          const long v = std::stol(tok, &used);
          if (used != tok.size() || v < 0 || v >= vocab) throw std::out_of_range(tok);
          p.push_back(static_cast<TokenId>(v));
        } catch (const std::exception&) {
          throw ConfigError(w.prompt_file + ":" + std::to_string(line_no) + ": invalid token '" + tok + "'");
        }
      }
      if (!p.empty()) prompts.push_back(std::move(p));
    }
    if (prompts.empty()) throw ConfigError(w.prompt_file + ":0: prompt file holds no prompts");
    return prompts;
  }
  std::mt19937_64 rng(w.synthetic_seed);
  std::uniform_int_distribution<int> len(w.synthetic_min_length, w.synthetic_max_length);
  std::uniform_int_distribution<TokenId> tok(0, vocab - 1);
  for (int i = 0; i < w.synthetic_count; ++i) {
    std::vector<TokenId> p(static_cast<std::size_t>(len(rng)));
    for (auto& t : p) t = tok(rng);
    prompts.push_back(std::move(p));
  }
  return prompts;
}

}  // namespace treedec
