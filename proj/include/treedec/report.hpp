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

#include <ostream>
#include <string>
#include <vector>

#include "treedec/engine.hpp"

namespace treedec {

void write_metrics_jsonl(std::ostream& os, const std::vector<DecodeMetrics>& metrics);
void write_plans_jsonl(std::ostream& os, const std::vector<PlanEvent>& plans);

void write_summary_header(std::ostream& os);
void write_summary_row(std::ostream& os, const std::string& mode, const RunSummary& s);

/// Space-separated token ids followed by a newline.
void write_transcript(std::ostream& os, const std::vector<TokenId>& tokens);

}  // namespace treedec
