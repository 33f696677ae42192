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

#include "xlir/metrics.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "xlir/error.h"
#include "xlir/kv_config.h"

namespace xlir {

RankedList rank(std::string query_id, std::vector<RankedEntry> scored,
                int num_classes) {
  std::sort(scored.begin(), scored.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.doc_id < b.doc_id;
            });
  return RankedList{std::move(query_id), std::move(scored), num_classes};
}

namespace {

// 1-based position of the first entry satisfying pred, 0 if none.
template <typename Pred>
std::size_t first_rank(const RankedList& rl, Pred pred) {
  for (std::size_t i = 0; i < rl.entries.size(); ++i) {
    if (pred(rl.entries[i])) return i + 1;
  }
  return 0;
}

bool is_mr(const RankedList& rl, const RankedEntry& e) {
  return e.label == rl.num_classes;
}

bool is_relevant(const RankedEntry& e) { return e.label >= kPartiallyRelevant; }

double gain(int label) { return std::exp2(static_cast<double>(label - 1)) - 1.0; }

double discount(std::size_t position) {  // 1-based
  return std::log2(static_cast<double>(position) + 1.0);
}

}  // namespace

double precision_mr_at_k(const RankedList& rl, std::size_t k) {
  const std::size_t r = first_rank(rl, [&](const RankedEntry& e) { return is_mr(rl, e); });
  return (r != 0 && r <= k) ? 1.0 : 0.0;
}

double precision_r_at_5(const RankedList& rl) {
  const std::size_t top = std::min<std::size_t>(5, rl.entries.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) hits += is_relevant(rl.entries[i]) ? 1 : 0;
  return static_cast<double>(hits) / 5.0;
}

double ndcg_at_k(const RankedList& rl, std::size_t k) {
  std::vector<int> labels;
  labels.reserve(rl.entries.size());
  for (const auto& e : rl.entries) labels.push_back(e.label);
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, labels.size()); ++i) {
    dcg += gain(labels[i]) / discount(i + 1);
  }
  std::sort(labels.begin(), labels.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, labels.size()); ++i) {
    idcg += gain(labels[i]) / discount(i + 1);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double average_precision(const RankedList& rl) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < rl.entries.size(); ++i) {
    if (is_relevant(rl.entries[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return hits ? sum / static_cast<double>(hits) : 0.0;
}

double mrr_mr(const RankedList& rl) {
  const std::size_t r = first_rank(rl, [&](const RankedEntry& e) { return is_mr(rl, e); });
  return r ? 1.0 / static_cast<double>(r) : 0.0;
}

double mrr_r(const RankedList& rl) {
  const std::size_t r = first_rank(rl, is_relevant);
  return r ? 1.0 / static_cast<double>(r) : 0.0;
}

QueryMetrics query_metrics(const RankedList& rl) {
  QueryMetrics q;
  q.query_id = rl.query_id;
  std::size_t n_mr = 0, n_rel = 0;
  for (const auto& e : rl.entries) {
    n_mr += is_mr(rl, e) ? 1 : 0;
    n_rel += is_relevant(e) ? 1 : 0;
  }
  q.multiple_mr = n_mr > 1;
  auto set = [&](Metric m, double v) { q.values[static_cast<std::size_t>(m)] = v; };
  if (n_mr > 0) {
    set(Metric::kPrecisionMrAt1, precision_mr_at_k(rl, 1));
    set(Metric::kPrecisionMrAt5, precision_mr_at_k(rl, 5));
    set(Metric::kMrrMr, mrr_mr(rl));
  }
  set(Metric::kPrecisionRAt5, precision_r_at_5(rl));
  set(Metric::kNdcgAt5, ndcg_at_5(rl));
  if (n_rel > 0) {
    set(Metric::kMap, average_precision(rl));
    set(Metric::kMrrR, mrr_r(rl));
  }
  return q;
}

MetricReport aggregate(std::span<const QueryMetrics> per_query) {
  if (per_query.empty()) throw InvalidArgument("aggregate: no queries");
  MetricReport report;
  for (std::size_t m = 0; m < kNumMetrics; ++m) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& q : per_query) {
      if (q.values[m]) {
        sum += *q.values[m];
        ++n;
      }
    }
    report.values[m] = n ? sum / static_cast<double>(n) : 0.0;
    report.n_queries[m] = n;
  }
  return report;
}

void write_metric_report_tsv(const MetricReport& report, std::ostream& out) {
  out << "metric\tvalue\tn_queries\n";
  for (std::size_t m = 0; m < kNumMetrics; ++m) {
    out << kMetricNames[m] << '\t' << format_double(report.values[m]) << '\t'
        << report.n_queries[m] << '\n';
  }
}

void write_query_metrics_jsonl(std::span<const QueryMetrics> per_query,
                               std::ostream& out) {
  for (const auto& q : per_query) {
    nlohmann::ordered_json j;
    j["query_id"] = q.query_id;
    for (std::size_t m = 0; m < kNumMetrics; ++m) {
      if (q.values[m]) {
        j[kMetricNames[m]] = *q.values[m];
      } else {
        j[kMetricNames[m]] = nullptr;
      }
    }
    if (q.multiple_mr) j["multiple_mr"] = true;
    out << j.dump() << '\n';
  }
}

}  // namespace xlir
