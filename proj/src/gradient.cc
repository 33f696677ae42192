// Copyright 2026 The xlir Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xlir/gradient.h"

#include <cmath>

#include "xlir/error.h"

namespace xlir {

std::string to_string(TableId table) {
  return table == TableId::kQuery ? "query" : "document";
}

std::string to_string(const GradKey& key) {
  return to_string(key.table) + "[" + std::to_string(key.row) + "]";
}

std::span<double> GradientPacket::row(const GradKey& key) {
  auto it = rows_.find(key);
  if (it == rows_.end()) it = rows_.emplace(key, std::vector<double>(dim_, 0.0)).first;
  return it->second;
}

const std::vector<double>* GradientPacket::find(const GradKey& key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

void GradientPacket::accumulate(const GradKey& key, std::span<const double> grad,
                                double scale) {
  if (grad.size() != dim_) {
    throw InvalidArgument("gradient row has dimension " +
                          std::to_string(grad.size()) + ", packet expects " +
                          std::to_string(dim_));
  }
  auto dst = row(key);
  for (std::size_t j = 0; j < dim_; ++j) dst[j] += scale * grad[j];
}

void GradientPacket::merge(const GradientPacket& other, double scale) {
  for (const auto& [key, values] : other) accumulate(key, values, scale);
}

void GradientPacket::scale(double factor) {
  for (auto& [key, values] : rows_) {
    for (double& v : values) v *= factor;
  }
}

double GradientPacket::global_norm() const {
  double sum = 0.0;
  for (const auto& [key, values] : rows_) {
    for (double v : values) sum += v * v;
  }
  return std::sqrt(sum);
}

double GradientPacket::max_row_norm() const {
  double best = 0.0;
  for (const auto& [key, values] : rows_) {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    best = std::max(best, std::sqrt(sum));
  }
  return best;
}

std::optional<GradKey> GradientPacket::first_non_finite() const {
  for (const auto& [key, values] : rows_) {
    for (double v : values) {
      if (!std::isfinite(v)) return key;
    }
  }
  return std::nullopt;
}

}  // namespace xlir
