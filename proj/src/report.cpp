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

#include "treedec/report.hpp"

#include <json.hpp>

namespace treedec {

void write_metrics_jsonl(std::ostream& os, const std::vector<DecodeMetrics>& metrics) {
  for (const auto& m : metrics) {
    nlohmann::ordered_json j;
    j["iteration"] = m.iteration;
    j["batch"] = m.batch;
    j["mean_seqlen"] = m.mean_seqlen;
    j["max_seqlen"] = m.max_seqlen;
    j["tree_size"] = m.tree_size;
    j["mean_survived"] = m.mean_survived;
    j["prune_rate"] = m.prune_rate;
    j["mean_accepted"] = m.mean_accepted;
    j["tokens"] = m.tokens;
    j["iteration_time"] = m.iteration_time;
    j["replanned"] = m.replanned;
    j["probe"] = m.probe;
    os << j.dump() << '\n';
  }
}

void write_plans_jsonl(std::ostream& os, const std::vector<PlanEvent>& plans) {
  for (const auto& p : plans) {
    nlohmann::ordered_json j;
    j["iteration"] = p.iteration;
    j["trigger"] = to_string(p.trigger);
    j["chosen_size"] = p.chosen_size;
    auto speed = nlohmann::ordered_json::object();
    for (const auto& [size, v] : p.speed) speed[std::to_string(size)] = v;
    j["speed"] = speed;
    if (p.fit) {
      j["beta0"] = p.fit->beta0;
      j["beta1"] = p.fit->beta1;
    } else {
      j["beta0"] = nullptr;
      j["beta1"] = nullptr;
    }
    os << j.dump() << '\n';
  }
}

void write_summary_header(std::ostream& os) {
  os << "mode,iterations,tokens,total_time,tokens_per_second,mean_accepted,mean_prune_rate,mean_tree_size\n";
}

void write_summary_row(std::ostream& os, const std::string& mode, const RunSummary& s) {
  const auto old = os.precision(10);
  os << mode << ',' << s.iterations << ',' << s.tokens << ',' << s.total_time << ',' << s.tokens_per_second << ','
     << s.mean_accepted << ',' << s.mean_prune_rate << ',' << s.mean_tree_size << '\n';
  os.precision(old);
}

void write_transcript(std::ostream& os, const std::vector<TokenId>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) os << (i ? " " : "") << tokens[i];
  os << '\n';
}

}  // namespace treedec
