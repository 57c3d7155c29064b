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

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace treedec {

struct LinearFit {
  double beta0 = 0.0;  // fixed per-iteration overhead
  double beta1 = 0.0;  // time per tree node
  double estimate(double size) const { return beta0 + beta1 * size; }
};

struct CostModelConfig {
  double alpha = 0.2;    // EMA factor for per-size iteration time
  double lambda = 0.01;  // staleness decay per iteration
  LinearFit prewarm{1.0, 0.0};
};

/// Verification cost as an affine function of token-tree size.
///
/// Each candidate size keeps an EMA of observed iteration times and the
/// iteration of its last update. A fit weights every observed size by
/// exp(-lambda * staleness) and solves the weighted least-squares line in
/// closed form. Sizes never observed carry no weight.
class CostModel {
 public:
  CostModel(std::vector<int> sizes, CostModelConfig config);

  const std::vector<int>& sizes() const { return sizes_; }
  const CostModelConfig& config() const { return config_; }
  bool has_size(int size) const;
  bool observed(int size) const;
  std::optional<double> average_time(int size) const;
  long last_update(int size) const;

  /// EMA update at iteration `now`; the first observation of a size is taken
  /// as is. Throws std::invalid_argument for sizes outside the candidate list
  /// or non-positive times.
  void observe(int size, double time, long now);

  std::vector<double> weights(long now) const;

  /// nullopt when fewer than two distinct sizes carry positive weight.
  std::optional<LinearFit> fit(long now) const;

  /// Refits and stores the result; keeps the previous fit on insufficient
  /// data. Returns whether a new fit was produced.
  bool refit(long now);
  const LinearFit& current() const { return current_; }
  bool has_fit() const { return fitted_; }
  double estimate(int size) const { return current_.estimate(size); }

  /// Forgets every observation and falls back to the pre-warm coefficients.
  void reset();

  /// size,T_perf,o,W,beta0,beta1 rows for diagnostics.
  void write_diagnostics(std::ostream& os, long now) const;

 private:
  std::size_t slot(int size) const;

  std::vector<int> sizes_;
  CostModelConfig config_;
  std::vector<double> average_;
  std::vector<long> last_update_;
  std::vector<bool> observed_;
  LinearFit current_;
  bool fitted_ = false;
};

/// Weighted least squares for y ~ b0 + b1 x; nullopt for a degenerate design.
std::optional<LinearFit> weighted_line_fit(std::span<const double> x, std::span<const double> y,
                                           std::span<const double> w);

}  // namespace treedec
