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
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "treedec/engine.hpp"
#include "treedec/latency_model.hpp"
#include "treedec/synthetic_oracle.hpp"
#include "treedec/tiny_transformer.hpp"

namespace treedec {

/// Configuration problem; the message starts with "<origin>:<line>: ".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BackendKind { kTinyTransformer, kSynthetic };

struct BackendSection {
  BackendKind kind = BackendKind::kSynthetic;
  std::uint64_t seed = 1;
  TinyTransformerConfig tiny;
  SyntheticOracleConfig synthetic;
  LatencyConfig latency;
  bool simulated_clock = true;
};

struct WorkloadSection {
  std::string prompt_file;  // resolved against the config directory
  int synthetic_count = 16;
  int synthetic_min_length = 4;
  int synthetic_max_length = 16;
  std::uint64_t synthetic_seed = 1;
  int max_tokens = 64;
  int batch_size = 1;
};

struct OutputSection {
  bool transcripts = true;
  std::string metrics = "metrics.jsonl";
  std::string plans = "plans.jsonl";
  std::string summary = "summary.csv";
};

struct SweepSection {
  std::vector<int> batch;
  std::vector<int> prune_layer;
  std::vector<int> prune_topk;
  std::vector<Mode> mode;
};

struct RunConfig {
  BackendSection backend;
  EngineConfig engine;
  WorkloadSection workload;
  OutputSection output;
  SweepSection sweep;
};

/// Parses a YAML run configuration. Unknown keys, wrong types, and values
/// outside their domain raise ConfigError anchored at the offending line.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>",
                       const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Replaces every seed (backend, latency clock, synthetic prompts).
void override_seed(RunConfig& config, std::uint64_t seed);

std::unique_ptr<ModelBackend> make_backend(const RunConfig& config);
std::vector<std::vector<TokenId>> make_prompts(const RunConfig& config);

}  // namespace treedec
