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

#ifndef XLIR_METRICS_H_
#define XLIR_METRICS_H_

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xlir/corpus.h"

namespace xlir {

struct RankedEntry {
  std::string doc_id;
  double score = 0.0;
  int label = kIrrelevant;
};

// Entries sorted by score descending, ties broken by doc_id ascending.
struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;
  int num_classes = kDefaultNumClasses;  // label num_classes is MR
};

RankedList rank(std::string query_id, std::vector<RankedEntry> scored,
                int num_classes = kDefaultNumClasses);

// 1 iff the first MR entry is within the top k.
double precision_mr_at_k(const RankedList& rl, std::size_t k);
// Entries with label >= 2 among the top 5, over a fixed denominator of 5.
double precision_r_at_5(const RankedList& rl);
// Gain 2^(y-1) - 1, log2(i+1) discount, normalized by the ideal ordering of
// the full candidate set; 0 when that ideal DCG is 0.
double ndcg_at_k(const RankedList& rl, std::size_t k);
inline double ndcg_at_5(const RankedList& rl) { return ndcg_at_k(rl, 5); }
// Binary relevance (label >= 2) over the whole list.
double average_precision(const RankedList& rl);
double mrr_mr(const RankedList& rl);  // 1 / rank of first MR, 0 if none
double mrr_r(const RankedList& rl);   // 1 / rank of first label >= 2, 0 if none

enum class Metric {
  kPrecisionMrAt1,
  kPrecisionMrAt5,
  kPrecisionRAt5,
  kNdcgAt5,
  kMap,
  kMrrMr,
  kMrrR,
};
inline constexpr std::size_t kNumMetrics = 7;
inline constexpr std::array<const char*, kNumMetrics> kMetricNames = {
    "P_mr@1", "P_mr@5", "P_r@5", "NDCG@5", "MAP", "MRR_mr", "MRR_r"};

// Per-query values; nullopt where the query does not contribute (MR metrics
// without an MR document, MAP and MRR_r without any relevant document).
struct QueryMetrics {
  std::string query_id;
  std::array<std::optional<double>, kNumMetrics> values;
  bool multiple_mr = false;

  std::optional<double> get(Metric m) const {
    return values[static_cast<std::size_t>(m)];
  }
};

QueryMetrics query_metrics(const RankedList& rl);

struct MetricReport {
  std::array<double, kNumMetrics> values{};
  std::array<std::size_t, kNumMetrics> n_queries{};

  double get(Metric m) const { return values[static_cast<std::size_t>(m)]; }
  std::size_t count(Metric m) const { return n_queries[static_cast<std::size_t>(m)]; }
};

// Unweighted mean per metric over its contributing queries. Throws on an
// empty input. A metric no query contributes to reports 0 with count 0.
MetricReport aggregate(std::span<const QueryMetrics> per_query);

// metric TAB value TAB n_queries, with a header row.
void write_metric_report_tsv(const MetricReport& report, std::ostream& out);
// One JSON object per query.
void write_query_metrics_jsonl(std::span<const QueryMetrics> per_query,
                               std::ostream& out);

}  // namespace xlir

#endif  // XLIR_METRICS_H_
