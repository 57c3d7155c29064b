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

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treedec/acceptance_model.hpp"
#include "treedec/backend.hpp"
#include "treedec/cost_model.hpp"
#include "treedec/latency_model.hpp"
#include "treedec/pruning.hpp"
#include "treedec/scheduler.hpp"

namespace treedec {

enum class Mode { kAutoregressive, kStaticTree, kPruneOnly, kDynamicOnly, kFull };

std::string to_string(Mode m);
std::optional<Mode> parse_mode(const std::string& s);
bool uses_pruning(Mode m);
bool uses_dynamic_tree(Mode m);

struct StaticTreeSpec {
  int size = 64;                // best nodes under the initial acceptance stats
  std::vector<RankPath> paths;  // explicit shape; overrides size when non-empty
};

struct EngineConfig {
  Mode mode = Mode::kFull;
  int num_heads = 4;
  int topk = 4;
  PruneConfig prune;
  SchedulerConfig scheduler;
  CostModelConfig cost;
  double acceptance_alpha = 0.05;
  bool acceptance_warmup = false;
  std::vector<std::vector<double>> acceptance_prior;  // empty: pre-warm curve
  StaticTreeSpec static_tree;
  std::optional<TokenId> eos_token;
};

/// One record per engine iteration.
struct DecodeMetrics {
  long iteration = 0;
  int batch = 0;
  double mean_seqlen = 0.0;
  int max_seqlen = 0;
  int tree_size = 0;          // drafted nodes per sequence
  double mean_survived = 0.0;
  double prune_rate = 0.0;    // mean over sequences
  double mean_accepted = 0.0;
  int tokens = 0;             // committed this iteration, all sequences
  double iteration_time = 0.0;
  bool replanned = false;
  bool probe = false;
};

struct PlanEvent {
  long iteration = 0;
  ReplanTrigger trigger = ReplanTrigger::kNone;
  int chosen_size = 0;
  std::map<int, double> speed;
  std::optional<LinearFit> fit;
};

struct RunSummary {
  long iterations = 0;
  long tokens = 0;
  double total_time = 0.0;        // clock units (milliseconds)
  double tokens_per_second = 0.0;
  double mean_accepted = 0.0;
  double mean_prune_rate = 0.0;
  double mean_tree_size = 0.0;
};

struct RunResult {
  std::vector<std::vector<TokenId>> transcripts;  // generated tokens per prompt
  std::vector<DecodeMetrics> metrics;
  std::vector<PlanEvent> plans;
  RunSummary summary;
};

/// Iteration time source: a simulated LatencyModel or, when none is given,
/// the wall clock in milliseconds.
class Engine {
 public:
  Engine(const ModelBackend& backend, EngineConfig config, LatencyModel* clock = nullptr);

  const EngineConfig& config() const { return config_; }
  const AcceptanceStats& acceptance() const { return stats_; }
  const CostModel& cost_model() const { return cost_; }
  long iteration() const { return iteration_; }

  /// Replaces the active batch. Every prompt must be non-empty.
  void start_batch(const std::vector<std::vector<TokenId>>& prompts, int max_new_tokens);
  bool active() const;
  DecodeMetrics step();

  /// Generated tokens of the current batch.
  std::vector<std::vector<TokenId>> transcripts() const;
  const std::vector<PlanEvent>& plans() const { return plans_; }

  /// Decodes all prompts in consecutive batches of `batch_size`.
  RunResult run(const std::vector<std::vector<TokenId>>& prompts, int max_new_tokens, int batch_size);

 private:
  struct Pending {
    std::size_t root_index;  // position of the root token in `tokens`
    int next_head;           // first head whose ground truth is still unknown
    HeadPredictions predictions;
  };
  struct Sequence {
    std::unique_ptr<SequenceState> state;
    std::vector<TokenId> tokens;  // prompt + generated
    std::size_t prompt_length = 0;
    bool finished = false;
    std::deque<Pending> pending;
  };

  const TreeSelection& plan_tree(int batch, double mean_seqlen, DecodeMetrics& m);
  void resolve_pending(Sequence& seq);
  std::vector<int> usable_sizes() const;

  const ModelBackend& backend_;
  EngineConfig config_;
  LatencyModel* clock_;
  AcceptanceStats stats_;
  CostModel cost_;
  MaskCache masks_;
  std::vector<Sequence> seqs_;
  int max_new_tokens_ = 0;
  long iteration_ = 0;

  TreeSelection static_selection_;
  TreeSelection dynamic_selection_;
  int dynamic_size_ = 0;
  std::optional<RuntimeSnapshot> last_plan_;
  std::deque<int> probes_;
  bool plan_due_ = false;
  ReplanTrigger pending_trigger_ = ReplanTrigger::kNone;
  std::vector<PlanEvent> plans_;
};

RunSummary summarize(const std::vector<DecodeMetrics>& metrics);

}  // namespace treedec
