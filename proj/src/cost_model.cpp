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

#include "treedec/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace treedec {

CostModel::CostModel(std::vector<int> sizes, CostModelConfig config)
    : sizes_(std::move(sizes)), config_(config), current_(config.prewarm) {
  std::sort(sizes_.begin(), sizes_.end());
  sizes_.erase(std::unique(sizes_.begin(), sizes_.end()), sizes_.end());
  if (sizes_.empty()) throw std::invalid_argument("cost model needs at least one candidate size");
  if (!(config_.alpha > 0.0 && config_.alpha <= 1.0)) throw std::invalid_argument("cost alpha must be in (0, 1]");
  if (config_.lambda < 0.0) throw std::invalid_argument("cost lambda must be >= 0");
  reset();
}

std::size_t CostModel::slot(int size) const {
  auto it = std::lower_bound(sizes_.begin(), sizes_.end(), size);
  if (it == sizes_.end() || *it != size) {
    throw std::invalid_argument("tree size " + std::to_string(size) + " is not a cost-model candidate");
  }
  return static_cast<std::size_t>(it - sizes_.begin());
}

bool CostModel::has_size(int size) const { return std::binary_search(sizes_.begin(), sizes_.end(), size); }

bool CostModel::observed(int size) const { return observed_[slot(size)]; }

std::optional<double> CostModel::average_time(int size) const {
  const auto i = slot(size);
  if (!observed_[i]) return std::nullopt;
  return average_[i];
}

long CostModel::last_update(int size) const { return last_update_[slot(size)]; }

void CostModel::observe(int size, double time, long now) {
  if (!(time > 0.0)) throw std::invalid_argument("iteration time must be positive");
  const auto i = slot(size);
  average_[i] = observed_[i] ? (1.0 - config_.alpha) * average_[i] + config_.alpha * time : time;
  observed_[i] = true;
  last_update_[i] = now;
}

std::vector<double> CostModel::weights(long now) const {
  std::vector<double> w(sizes_.size(), 0.0);
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (observed_[i]) w[i] = std::exp(-config_.lambda * static_cast<double>(now - last_update_[i]));
  }
  return w;
}

std::optional<LinearFit> CostModel::fit(long now) const {
  std::vector<double> x(sizes_.begin(), sizes_.end());
  return weighted_line_fit(x, average_, weights(now));
}

bool CostModel::refit(long now) {
  auto f = fit(now);
  if (!f) return false;
  current_ = *f;
  fitted_ = true;
  return true;
}

void CostModel::reset() {
  average_.assign(sizes_.size(), 0.0);
  last_update_.assign(sizes_.size(), 0);
  observed_.assign(sizes_.size(), false);
  current_ = config_.prewarm;
  fitted_ = false;
}

void CostModel::write_diagnostics(std::ostream& os, long now) const {
  const auto w = weights(now);
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (!observed_[i]) continue;
    os << sizes_[i] << ',' << average_[i] << ',' << (now - last_update_[i]) << ',' << w[i] << ','
       << current_.beta0 << ',' << current_.beta1 << '\n';
  }
}

std::optional<LinearFit> weighted_line_fit(std::span<const double> x, std::span<const double> y,
                                           std::span<const double> w) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0)) continue;
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    ++used;
  }
  if (used < 2) return std::nullopt;
  const double mx = sx / sw;
  const double my = sy / sw;
  // Centered sums; the uncentered normal equations lose digits for large x.
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0)) continue;
    const double dx = x[i] - mx;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - my);
  }
  const double scale = std::max(std::abs(mx), 1.0);
  if (!(sxx > 1e-12 * sw * scale * scale)) return std::nullopt;
  LinearFit f;
  f.beta1 = sxy / sxx;
  f.beta0 = my - f.beta1 * mx;
  return f;
}

}  // namespace treedec
