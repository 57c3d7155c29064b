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

#include "treedec/latency_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace treedec {

LatencyModel::LatencyModel(LatencyConfig config) : config_(config), rng_(config.seed) {
  if (config_.noise < 0.0) throw std::invalid_argument("latency noise must be >= 0");
}

double LatencyModel::fixed_cost(int batch, double mean_seqlen) const {
  return config_.c0 + config_.c0_per_batch * batch + config_.c0_per_token * mean_seqlen;
}

double LatencyModel::per_node_cost(int batch) const { return config_.c1 + config_.c1_per_batch * batch; }

double LatencyModel::expected(int batch, double mean_seqlen, double nodes) const {
  return fixed_cost(batch, mean_seqlen) + per_node_cost(batch) * nodes;
}

double LatencyModel::sample(int batch, double mean_seqlen, double nodes) {
  double t = expected(batch, mean_seqlen, nodes);
  if (config_.noise > 0.0) t += std::uniform_real_distribution<double>(-config_.noise, config_.noise)(rng_);
  return std::max(t, 1e-9);
}

double effective_nodes(double drafted, double survived, int prune_layer, int num_layers) {
  if (num_layers <= 0) return drafted;
  const double early = static_cast<double>(std::clamp(prune_layer, 0, num_layers)) / num_layers;
  return early * drafted + (1.0 - early) * survived;
}

}  // namespace treedec
