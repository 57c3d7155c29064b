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
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "treedec/token_tree.hpp"

namespace treedec {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Subsampling routine under test; the default is subsample_mask.
using MaskSubsampler = std::function<TreeMask(const TreeMask&, std::span<const NodeIndex>)>;

SuiteResult suite_losslessness(std::uint64_t seed);
SuiteResult suite_mask_subsample(std::uint64_t seed, const MaskSubsampler& subsample = subsample_mask);
SuiteResult suite_regression_recovery(std::uint64_t seed);
SuiteResult suite_estimator_convergence(std::uint64_t seed);

std::vector<SuiteResult> run_selftest(std::uint64_t seed);
void print_results(std::ostream& os, const std::vector<SuiteResult>& results);

}  // namespace treedec
