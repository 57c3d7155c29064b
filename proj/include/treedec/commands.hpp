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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "treedec/config.hpp"

namespace treedec {

struct CommandOptions {
  std::string config_path;
  std::string axis;      // sweep only: batch, prune_layer, prune_topk, mode, or a comma-joined combination
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  bool verbose = false;
};

/// Runs `config` end to end with a fresh backend and clock.
RunResult execute(const RunConfig& config, const ModelBackend& backend);

struct SweepRow {
  std::vector<std::pair<std::string, std::string>> axes;  // axis name -> value
  std::string mode;
  RunSummary summary;
  double baseline_tokens_per_second = 0.0;
  double speedup = 0.0;
};

/// One row per point of the cartesian product of the requested axes. Every
/// point is compared with an autoregressive run of the same backend, clock
/// and batch size.
std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<std::string>& axes);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// Each command returns a process exit status and reports problems on `err`.
int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_selftest(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace treedec
