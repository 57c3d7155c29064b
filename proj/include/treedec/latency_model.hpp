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
#include <random>

namespace treedec {

struct LatencyConfig {
  double c0 = 10.0;             // fixed per-iteration time
  double c0_per_batch = 0.0;
  double c0_per_token = 0.0;    // per token of mean sequence length
  double c1 = 0.05;             // per tree node
  double c1_per_batch = 0.0;    // per tree node and batch element
  double noise = 0.0;           // half-width of uniform noise
  std::uint64_t seed = 1;
};

/// Simulated iteration clock:
///   t = c0(batch, seqlen) + c1(batch) * nodes + U(-noise, noise)
/// with c0 and c1 affine in their arguments. Affine in the node count for a
/// fixed batch and sequence length.
class LatencyModel {
 public:
  explicit LatencyModel(LatencyConfig config);

  const LatencyConfig& config() const { return config_; }
  double fixed_cost(int batch, double mean_seqlen) const;
  double per_node_cost(int batch) const;
  double expected(int batch, double mean_seqlen, double nodes) const;

  /// Draws one iteration time; never returns a non-positive value.
  double sample(int batch, double mean_seqlen, double nodes);

 private:
  LatencyConfig config_;
  std::mt19937_64 rng_;
};

/// Backbone work of a pruned tree in units of full-depth nodes: the drafted
/// nodes run `prune_layer` layers, survivors run the rest.
double effective_nodes(double drafted, double survived, int prune_layer, int num_layers);

}  // namespace treedec
