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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "xlir/error.h"
#include "xlir/gradcheck.h"
#include "xlir/metrics.h"
#include "xlir/rng.h"

using namespace xlir;

namespace {

// Scores descend with position so the list keeps the given order.
RankedList ordered(std::initializer_list<int> labels) {
  std::vector<RankedEntry> e;
  int i = 0;
  for (int y : labels) {
    e.push_back({"d" + std::to_string(i), 100.0 - i, y});
    ++i;
  }
  return rank("q", std::move(e));
}

constexpr int NR = kIrrelevant, SR = kPartiallyRelevant, MR = kRelevant;

}  // namespace

TEST_CASE("ranking sorts by score then doc id") {
  const auto rl = rank("q", {{"b", 0.5, NR}, {"a", 0.5, SR}, {"c", 0.9, MR}});
  CHECK(rl.entries[0].doc_id == "c");
  CHECK(rl.entries[1].doc_id == "a");
  CHECK(rl.entries[2].doc_id == "b");
  const auto tie = rank("q", {{"b", 0.5, NR}, {"a", 0.5, MR}});
  CHECK(tie.entries[0].doc_id == "a");
  const std::vector<RankedEntry> sorted = {{"x", 3.0, MR}, {"y", 2.0, NR}, {"z", 1.0, SR}};
  const std::vector<RankedEntry> shuffled = {sorted[2], sorted[0], sorted[1]};
  const auto a = rank("q", sorted), b = rank("q", shuffled);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.entries[i].doc_id == b.entries[i].doc_id);
  CHECK(a.entries[0].doc_id == "x");
}

TEST_CASE("fixture values") {
  SUBCASE("P_r@5 counts relevant docs over five") {
    CHECK(precision_r_at_5(ordered({MR, SR, SR, NR, NR})) == doctest::Approx(0.6));
    CHECK(precision_r_at_5(ordered({NR, NR, NR, NR, NR, NR})) == 0.0);
    CHECK(precision_r_at_5(ordered({MR, NR, NR, NR, NR})) == doctest::Approx(0.2));
    CHECK(precision_r_at_5(ordered({MR, NR, SR, NR, SR, SR})) == doctest::Approx(0.6));
    CHECK(precision_r_at_5(ordered({MR, SR})) == doctest::Approx(0.4));
  }
  SUBCASE("P_mr@k and MRR") {
    CHECK(precision_mr_at_k(ordered({MR, NR}), 1) == 1.0);
    CHECK(precision_mr_at_k(ordered({NR, NR, NR, NR, NR, MR}), 5) == 0.0);
    CHECK(precision_mr_at_k(ordered({NR, MR, SR}), 2) == 1.0);
    const auto rl = ordered({NR, SR, NR, MR, NR, NR});
    CHECK(precision_mr_at_k(rl, 1) == 0.0);
    CHECK(precision_mr_at_k(rl, 5) == 1.0);
    CHECK(precision_mr_at_k(rl, 3) == 0.0);
    CHECK(mrr_mr(rl) == 0.25);
    CHECK(mrr_r(rl) == 0.5);
  }
  SUBCASE("average precision") {
    const auto alone = ordered({MR});
    CHECK(average_precision(alone) == 1.0);
    CHECK(mrr_mr(alone) == 1.0);
    CHECK(mrr_r(alone) == 1.0);
    CHECK(mrr_mr(ordered({NR, NR, MR})) == doctest::Approx(1.0 / 3.0));
    CHECK(mrr_r(ordered({SR, NR, MR})) == 1.0);
    CHECK(mrr_mr(ordered({SR, NR, MR})) == doctest::Approx(1.0 / 3.0));
    CHECK(average_precision(ordered({NR, NR, MR, NR})) == doctest::Approx(1.0 / 3.0));
    CHECK(average_precision(ordered({SR, NR, MR, NR})) == doctest::Approx(5.0 / 6.0));
    CHECK(average_precision(ordered({NR, NR})) == 0.0);
  }
  SUBCASE("NDCG@5 with the MR document second") {
    const double dcg = 1.0 + 3.0 / std::log2(3.0);
    const double idcg = 3.0 + 1.0 / std::log2(3.0);
    CHECK(ndcg_at_5(ordered({SR, MR, NR, NR, NR})) == doctest::Approx(dcg / idcg).epsilon(1e-14));
    CHECK(ndcg_at_5(ordered({MR, SR, NR, NR, NR})) == doctest::Approx(1.0));
    CHECK(ndcg_at_5(ordered({NR, NR})) == 0.0);
  }
  SUBCASE("ideal DCG uses relevant documents outside the top 5") {
    const auto rl = ordered({NR, NR, NR, NR, NR, MR});
    CHECK(ndcg_at_5(rl) == 0.0);
    CHECK(ndcg_at_k(rl, 6) == doctest::Approx((3.0 / std::log2(7.0)) / 3.0));
  }
}

TEST_CASE("query metrics and aggregation") {
  const auto q1 = query_metrics(ordered({MR, NR}));
  const auto q2 = query_metrics(ordered({NR, MR}));
  const auto q3 = query_metrics(ordered({MR, SR}));
  const auto none = query_metrics(ordered({NR, NR}));
  CHECK(!none.get(Metric::kPrecisionMrAt1).has_value());
  CHECK(!none.get(Metric::kMap).has_value());
  CHECK(none.get(Metric::kNdcgAt5).has_value());

  const std::vector<QueryMetrics> all = {q1, q2, q3, none};
  const auto rep = aggregate(all);
  CHECK(rep.get(Metric::kPrecisionMrAt1) == doctest::Approx(2.0 / 3.0));
  CHECK(rep.count(Metric::kPrecisionMrAt1) == 3);
  CHECK(rep.count(Metric::kNdcgAt5) == 4);
  CHECK_THROWS(aggregate(std::span<const QueryMetrics>{}));

  const std::vector<QueryMetrics> only_none = {none};
  CHECK(aggregate(only_none).get(Metric::kMrrMr) == 0.0);
  CHECK(aggregate(only_none).count(Metric::kMrrMr) == 0);

  const auto multi = query_metrics(ordered({NR, MR, MR}));
  CHECK(multi.multiple_mr);
  CHECK(multi.get(Metric::kMrrMr) == 0.5);

  std::ostringstream tsv, jsonl;
  write_metric_report_tsv(rep, tsv);
  CHECK(tsv.str().rfind("metric\tvalue\tn_queries\n", 0) == 0);
  CHECK(tsv.str().find("P_mr@1\t") != std::string::npos);
  write_query_metrics_jsonl(all, jsonl);
  int lines = 0;
  for (char ch : jsonl.str()) lines += ch == '\n';
  CHECK(lines == 4);
}

TEST_CASE("metrics match the brute-force definitions on random lists") {
  Rng rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<RankedEntry> e;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse scores force ties.
      e.push_back({"d" + std::to_string(rng.below(100)) + "_" + std::to_string(i),
                   static_cast<double>(rng.below(4)), 1 + static_cast<int>(rng.below(3))});
    }
    const auto rl = rank("q", e);
    const auto fast = query_metrics(rl);
    const auto slow = brute_force_metrics(rl);
    if (fast.get(Metric::kPrecisionMrAt1)) {
      CHECK(*fast.get(Metric::kPrecisionMrAt1) <= *fast.get(Metric::kPrecisionMrAt5));
      CHECK(*fast.get(Metric::kMrrR) >= *fast.get(Metric::kMrrMr));
    }
    CHECK(*fast.get(Metric::kNdcgAt5) >= 0.0);
    CHECK(*fast.get(Metric::kNdcgAt5) <= 1.0 + 1e-15);
    CHECK(fast.multiple_mr == slow.multiple_mr);
    for (std::size_t m = 0; m < kNumMetrics; ++m) {
      REQUIRE(fast.values[m].has_value() == slow.values[m].has_value());
      if (fast.values[m]) REQUIRE(std::abs(*fast.values[m] - *slow.values[m]) <= 1e-12);
    }
  }
}

TEST_CASE("metrics depend only on the induced order") {
  Rng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(12);
    std::vector<RankedEntry> e, t;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = rng.uniform(-1.0, 1.0);
      const int y = 1 + static_cast<int>(rng.below(3));
      e.push_back({"d" + std::to_string(i), s, y});
      t.push_back({"d" + std::to_string(i), std::exp(3.0 * s) + 7.0, y});
    }
    const auto a = query_metrics(rank("q", e));
    const auto b = query_metrics(rank("q", t));
    for (std::size_t m = 0; m < kNumMetrics; ++m) REQUIRE(a.values[m] == b.values[m]);
  }
}
