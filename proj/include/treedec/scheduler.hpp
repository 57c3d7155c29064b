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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "treedec/cost_model.hpp"

namespace treedec {

struct SchedulerConfig {
  int resize_batch_delta = 1;
  int resize_seqlen_delta = 256;
  int replan_period = 64;
  std::vector<int> size_candidates{1, 2, 4, 8, 16, 32, 64};
  // Score (l + 1) / T instead of l / T, counting the bonus token.
  bool count_bonus = false;
};

struct SizeChoice {
  int size = 1;
  std::map<int, double> speed;  // estimated tokens per time unit for each scored size
};

/// Scans the candidates once and returns the size with the highest
/// l(i) / T_est(i); ties go to the smaller size. Sizes whose estimate is not
/// positive are skipped; with nothing left the choice is size 1.
SizeChoice choose_size(const std::map<int, double>& l_curve, const LinearFit& cost, bool count_bonus = false);

struct RuntimeSnapshot {
  long iteration = 0;
  int batch = 0;
  double mean_seqlen = 0.0;
};

enum class ReplanTrigger { kNone, kInitial, kBatch, kSeqlen, kPeriod };

std::string to_string(ReplanTrigger t);

/// Decides whether the tree size should be re-planned given the snapshot of
/// the last planning event. Batch changes take precedence over sequence
/// length drift, which takes precedence over the periodic backstop.
ReplanTrigger should_replan(const RuntimeSnapshot& now, const std::optional<RuntimeSnapshot>& last_plan,
                            const SchedulerConfig& config);

}  // namespace treedec
