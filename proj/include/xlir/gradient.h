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

#ifndef XLIR_GRADIENT_H_
#define XLIR_GRADIENT_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xlir/corpus.h"

namespace xlir {

enum class TableId : int { kQuery = 0, kDocument = 1 };

std::string to_string(TableId table);

struct GradKey {
  TableId table = TableId::kQuery;
  TokenId row = 0;

  friend auto operator<=>(const GradKey&, const GradKey&) = default;
};

std::string to_string(const GradKey& key);

// Sparse row gradients keyed by (table, row). Rows iterate in key order, so
// every reduction over a packet has a fixed summation order.
class GradientPacket {
 public:
  using Rows = std::map<GradKey, std::vector<double>>;

  explicit GradientPacket(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  // Row for `key`, created as zeros on first access.
  std::span<double> row(const GradKey& key);
  // nullptr when absent.
  const std::vector<double>* find(const GradKey& key) const;

  // row(key) += scale * grad
  void accumulate(const GradKey& key, std::span<const double> grad,
                  double scale = 1.0);
  void merge(const GradientPacket& other, double scale = 1.0);
  void scale(double factor);

  // sqrt of the sum of squared entries, summed in key order.
  double global_norm() const;
  double max_row_norm() const;
  std::optional<GradKey> first_non_finite() const;

  std::int64_t step_id() const { return step_id_; }
  void set_step_id(std::int64_t id) { step_id_ = id; }

  Rows::const_iterator begin() const { return rows_.begin(); }
  Rows::const_iterator end() const { return rows_.end(); }

 private:
  std::size_t dim_;
  std::int64_t step_id_ = 0;
  Rows rows_;
};

}  // namespace xlir

#endif  // XLIR_GRADIENT_H_
