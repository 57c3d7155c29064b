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

#include "treedec/scheduler.hpp"

#include <cmath>
#include <cstdlib>

namespace treedec {

SizeChoice choose_size(const std::map<int, double>& l_curve, const LinearFit& cost, bool count_bonus) {
  SizeChoice choice;
  double best = -1.0;
  bool found = false;
  for (const auto& [size, l] : l_curve) {
    const double t = cost.estimate(size);
    if (!(t > 0.0) || !std::isfinite(t)) continue;
    const double v = (count_bonus ? l + 1.0 : l) / t;
    choice.speed[size] = v;
    // Map iteration is ascending, so strict > keeps the smaller size on ties.
    if (!found || v > best) {
      best = v;
      choice.size = size;
      found = true;
    }
  }
  if (!found) choice.size = 1;
  return choice;
}

std::string to_string(ReplanTrigger t) {
  switch (t) {
    case ReplanTrigger::kNone: return "none";
    case ReplanTrigger::kInitial: return "initial";
    case ReplanTrigger::kBatch: return "batch";
    case ReplanTrigger::kSeqlen: return "seqlen";
    case ReplanTrigger::kPeriod: return "period";
  }
  return "unknown";
}

ReplanTrigger should_replan(const RuntimeSnapshot& now, const std::optional<RuntimeSnapshot>& last_plan,
                            const SchedulerConfig& config) {
  if (!last_plan) return ReplanTrigger::kInitial;
  if (std::abs(now.batch - last_plan->batch) >= config.resize_batch_delta) return ReplanTrigger::kBatch;
  if (std::abs(now.mean_seqlen - last_plan->mean_seqlen) >= config.resize_seqlen_delta) return ReplanTrigger::kSeqlen;
  if (now.iteration - last_plan->iteration >= config.replan_period) return ReplanTrigger::kPeriod;
  return ReplanTrigger::kNone;
}

}  // namespace treedec
