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

#include "xlir/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "xlir/encoder.h"
#include "xlir/error.h"
#include "xlir/kv_config.h"
#include "xlir/rng.h"
#include "xlir/similarity.h"
#include "xlir/trainer.h"

namespace xlir {

std::vector<double> fd_gradient(const ScalarFunction& f, std::span<const double> x,
                                double h) {
  if (!(h > 0.0)) throw InvalidArgument("fd_gradient: step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("fd_gradient: non-finite function value at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

FDReport compare_gradients(std::span<const double> analytic,
                           std::span<const double> numeric, double h) {
  if (analytic.size() != numeric.size()) {
    throw InvalidArgument("compare_gradients: size mismatch");
  }
  FDReport report;
  report.h = h;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    FDCoordinate c;
    c.analytic = analytic[i];
    c.numeric = numeric[i];
    c.abs_error = std::abs(c.analytic - c.numeric);
    c.rel_error =
        c.abs_error / std::max({std::abs(c.analytic), std::abs(c.numeric), 1e-12});
    report.max_rel_error = std::max(report.max_rel_error, c.rel_error);
    report.max_abs_error = std::max(report.max_abs_error, c.abs_error);
    report.coords.push_back(c);
  }
  return report;
}

void merge_report(FDReport& into, const FDReport& other) {
  into.max_rel_error = std::max(into.max_rel_error, other.max_rel_error);
  into.max_abs_error = std::max(into.max_abs_error, other.max_abs_error);
  into.coords.insert(into.coords.end(), other.coords.begin(), other.coords.end());
}

// ---------------------------------------------------------------------------
// Reference forward implementations

namespace reference {

std::vector<double> encode(std::span<const double> table, std::size_t dim,
                           std::span<const std::int32_t> tokens) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    double total = 0.0;
    for (std::int32_t t : tokens) total += table[static_cast<std::size_t>(t) * dim + j];
    out[j] = std::tanh(total / static_cast<double>(tokens.size()));
  }
  return out;
}

double smooth_cosine(std::span<const double> q, std::span<const double> d,
                     double epsilon) {
  double qq = 0.0, dd = 0.0, qd = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    qq += q[i] * q[i];
    dd += d[i] * d[i];
    qd += q[i] * d[i];
  }
  return qd / ((std::sqrt(qq) + epsilon) * (std::sqrt(dd) + epsilon));
}

namespace {
double theta(std::span<const double> inner, int i) {
  if (i == 0) return -1.0;
  if (i == static_cast<int>(inner.size()) + 1) return 1.0;
  return inner[static_cast<std::size_t>(i - 1)];
}
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double sosl(double r, int y, std::span<const double> inner) {
  const double upper = theta(inner, y), lower = theta(inner, y - 1);
  double v = 0.0;
  if (r > upper) v += std::pow(upper - r, 2);
  if (r < lower) v += std::pow(r - lower, 2);
  return v;
}

double mse(double r, int y, std::span<const double> inner) {
  const double mid = (theta(inner, y - 1) + theta(inner, y)) / 2.0;
  return std::pow(r - mid, 2);
}

double proportional_odds(double r, int y, std::span<const double> inner, double scale) {
  const int k = static_cast<int>(inner.size()) + 1;
  const double upper = y == k ? 1.0 : logistic(scale * (theta(inner, y) - r));
  const double lower = y == 1 ? 0.0 : logistic(scale * (theta(inner, y - 1) - r));
  return -std::log(upper - lower);
}

double loss(LossKind kind, double r, int y, std::span<const double> inner,
            double po_scale) {
  switch (kind) {
    case LossKind::kSosl: return sosl(r, y, inner);
    case LossKind::kMse: return mse(r, y, inner);
    case LossKind::kProportionalOdds: return proportional_odds(r, y, inner, po_scale);
  }
  return std::nan("");
}

}  // namespace reference

// ---------------------------------------------------------------------------
// Brute-force metrics

QueryMetrics brute_force_metrics(const RankedList& rl) {
  const auto& e = rl.entries;
  const std::size_t n = e.size();
  // Position of entry i = 1 + number of entries ranked ahead of it.
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (e[j].score > e[i].score ||
          (e[j].score == e[i].score && e[j].doc_id < e[i].doc_id)) {
        ++ahead;
      }
    }
    pos[i] = ahead + 1;
  }
  const int mr_label = rl.num_classes;
  std::size_t best_mr = 0, best_rel = 0, n_mr = 0, n_rel = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (e[i].label == mr_label) {
      ++n_mr;
      if (best_mr == 0 || pos[i] < best_mr) best_mr = pos[i];
    }
    if (e[i].label >= 2) {
      ++n_rel;
      if (best_rel == 0 || pos[i] < best_rel) best_rel = pos[i];
    }
  }

  QueryMetrics q;
  q.query_id = rl.query_id;
  q.multiple_mr = n_mr > 1;
  auto put = [&](Metric m, double v) { q.values[static_cast<std::size_t>(m)] = v; };

  if (n_mr > 0) {
    put(Metric::kPrecisionMrAt1, best_mr <= 1 ? 1.0 : 0.0);
    put(Metric::kPrecisionMrAt5, best_mr <= 5 ? 1.0 : 0.0);
    put(Metric::kMrrMr, 1.0 / static_cast<double>(best_mr));
  }

  double rel_top5 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (e[i].label >= 2 && pos[i] <= 5) rel_top5 += 1.0;
  }
  put(Metric::kPrecisionRAt5, rel_top5 / 5.0);

  auto dcg_at_5 = [](const std::vector<int>& labels_by_position) {
    double total = 0.0;
    for (std::size_t p = 1; p <= labels_by_position.size() && p <= 5; ++p) {
      total += (std::pow(2.0, labels_by_position[p - 1] - 1) - 1.0) /
               std::log2(static_cast<double>(p) + 1.0);
    }
    return total;
  };
  std::vector<int> by_position(n);
  for (std::size_t i = 0; i < n; ++i) by_position[pos[i] - 1] = e[i].label;
  const double dcg = dcg_at_5(by_position);
  std::vector<int> labels = by_position;
  double idcg = 0.0;
  if (n <= 8) {
    std::sort(labels.begin(), labels.end());
    do {
      idcg = std::max(idcg, dcg_at_5(labels));
    } while (std::next_permutation(labels.begin(), labels.end()));
  } else {
    std::sort(labels.rbegin(), labels.rend());
    idcg = dcg_at_5(labels);
  }
  put(Metric::kNdcgAt5, idcg > 0.0 ? dcg / idcg : 0.0);

  if (n_rel > 0) {
    double precision_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (e[i].label < 2) continue;
      double hits = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (e[j].label >= 2 && pos[j] <= pos[i]) hits += 1.0;
      }
      precision_sum += hits / static_cast<double>(pos[i]);
    }
    put(Metric::kMap, precision_sum / static_cast<double>(n_rel));
    put(Metric::kMrrR, 1.0 / static_cast<double>(best_rel));
  }
  return q;
}

// ---------------------------------------------------------------------------
// SOSL smoothness scan

SmoothnessReport check_sosl_smoothness(const ThresholdVector& th, double grid_step,
                                       double margin) {
  if (!(grid_step > 0.0)) throw InvalidArgument("grid_step must be positive");
  SmoothnessReport report;
  report.grid_step = grid_step;
  const auto steps = static_cast<long long>(std::ceil((2.0 + 2.0 * margin) / grid_step));
  for (int y = 1; y <= th.num_classes(); ++y) {
    SmoothnessClass c;
    c.y = y;
    c.tight_bound = sosl_gradient_bound(y, th);
    double prev_grad = 0.0;
    for (long long i = 0; i <= steps; ++i) {
      const double r = -1.0 - margin + grid_step * static_cast<double>(i);
      const double g = sosl(r, y, th).dvalue_dr;
      if (r >= -1.0 && r <= 1.0 && std::abs(g) > c.max_abs_grad) {
        c.max_abs_grad = std::abs(g);
        c.argmax_r = r;
      }
      if (i > 0) {
        c.max_second_diff = std::max(c.max_second_diff, std::abs(g - prev_grad) / grid_step);
      }
      prev_grad = g;
    }
    // Endpoints are where the bound is attained.
    for (double r : {-1.0, 1.0}) {
      const double g = std::abs(sosl(r, y, th).dvalue_dr);
      if (g > c.max_abs_grad) {
        c.max_abs_grad = g;
        c.argmax_r = r;
      }
    }
    for (double t : {th.lower(y), th.upper(y)}) {
      const double jump = std::abs(sosl(t + grid_step, y, th).dvalue_dr -
                                   sosl(t - grid_step, y, th).dvalue_dr);
      c.max_threshold_jump = std::max(c.max_threshold_jump, jump);
    }
    if (c.max_abs_grad > c.tight_bound + 1e-12 || c.max_abs_grad > 4.0 ||
        c.max_threshold_jump > 2.0 * grid_step * (1.0 + 1e-9) + 1e-15 ||
        c.max_second_diff > 2.0 + 1e-6) {
      report.ok = false;
    }
    if (c.max_abs_grad > report.max_abs_grad) {
      report.max_abs_grad = c.max_abs_grad;
      report.argmax_y = y;
      report.argmax_r = c.argmax_r;
    }
    report.classes.push_back(c);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Suite

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t dim, double norm) {
  std::vector<double> v(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double& x : v) {
      x = rng.uniform(-1.0, 1.0);
      sq += x * x;
    }
  } while (sq < 1e-6);
  const double s = norm / std::sqrt(sq);
  for (double& x : v) x *= s;
  return v;
}

std::vector<double> random_thresholds(Rng& rng) {
  double a, b;
  do {
    a = rng.uniform(-0.9, 0.9);
    b = rng.uniform(-0.9, 0.9);
  } while (std::abs(a - b) < 0.05);
  return {std::min(a, b), std::max(a, b)};
}

constexpr double kEpsilons[] = {0.05, 0.2, 0.5, 1.0, 2.0};

SuiteCheck check_similarity(Rng& rng, std::size_t instances) {
  SuiteCheck check{"smooth_cosine", instances, 0.0, 1e-4, true};
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t p = static_cast<std::size_t>(rng.between(2, 8));
    const double eps = kEpsilons[rng.below(5)];
    auto norm = [&] { return std::exp(rng.uniform(std::log(0.01), std::log(10.0))); };
    const auto q = random_vector(rng, p, norm());
    const auto d = random_vector(rng, p, norm());
    const auto res = smooth_cosine(q, d, SimilarityConfig{eps, false});
    std::vector<double> analytic = res.grad_q;
    analytic.insert(analytic.end(), res.grad_d.begin(), res.grad_d.end());
    std::vector<double> x = q;
    x.insert(x.end(), d.begin(), d.end());
    const auto numeric = fd_gradient(
        [&](std::span<const double> v) {
          return reference::smooth_cosine(v.first(p), v.subspan(p), eps);
        },
        x);
    const auto rep = compare_gradients(analytic, numeric, kDefaultFdStep);
    check.max_rel_error = std::max(check.max_rel_error, rep.max_rel_error);
  }
  check.passed = check.max_rel_error <= check.tolerance;
  return check;
}

SuiteCheck check_loss(Rng& rng, std::size_t instances, LossKind kind) {
  SuiteCheck check{to_string(kind), instances, 0.0, 1e-6, true};
  double kink_abs = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inner = random_thresholds(rng);
    const ThresholdVector th(inner);
    const int y = static_cast<int>(rng.between(1, 3));
    double r = rng.uniform(-1.0, 1.0);
    if (kind == LossKind::kSosl && i % 10 == 0) r = rng.below(2) ? th.lower(y) : th.upper(y);
    const double analytic = evaluate_loss(kind, r, y, th).dvalue_dr;
    const double x[1] = {r};
    const double numeric = fd_gradient(
        [&](std::span<const double> v) { return reference::loss(kind, v[0], y, inner, 5.0); },
        x)[0];
    const bool near_kink = kind == LossKind::kSosl &&
                           (std::abs(r - th.lower(y)) < 1e-3 || std::abs(r - th.upper(y)) < 1e-3);
    if (near_kink) {
      kink_abs = std::max(kink_abs, std::abs(analytic - numeric));
    } else {
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      check.max_rel_error = std::max(check.max_rel_error, rel);
    }
  }
  // Exactly at a threshold one side is flat and the other has curvature 2,
  // so central differences are off by h/2 there.
  check.passed = check.max_rel_error <= check.tolerance && kink_abs <= kDefaultFdStep;
  return check;
}

SuiteCheck check_encoder(Rng& rng, std::size_t instances) {
  SuiteCheck check{"encoder", instances, 0.0, 1e-4, true};
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t p = static_cast<std::size_t>(rng.between(1, 8));
    const std::size_t vocab = 6;
    EmbeddingTable table("t", vocab, p);
    for (double& v : table.data()) v = rng.uniform(-1.0, 1.0);
    std::vector<TokenId> tokens(static_cast<std::size_t>(rng.between(1, 5)));
    for (auto& t : tokens) t = static_cast<TokenId>(rng.below(vocab));
    std::vector<double> upstream(p);
    for (double& u : upstream) u = rng.uniform(-1.0, 1.0);

    const auto cached = encode(table, tokens);
    const auto packet = encode_backward(table, TableId::kQuery, tokens, cached, upstream);
    std::vector<double> analytic(vocab * p, 0.0);
    for (const auto& [key, row] : packet) {
      std::copy(row.begin(), row.end(), analytic.begin() + key.row * static_cast<long>(p));
    }
    const auto numeric = fd_gradient(
        [&](std::span<const double> w) {
          const auto out = reference::encode(w, p, tokens);
          double s = 0.0;
          for (std::size_t j = 0; j < p; ++j) s += upstream[j] * out[j];
          return s;
        },
        table.data());
    const auto rep = compare_gradients(analytic, numeric, kDefaultFdStep);
    check.max_rel_error = std::max(check.max_rel_error, rep.max_rel_error);
  }
  check.passed = check.max_rel_error <= check.tolerance;
  return check;
}

}  // namespace

namespace {

SuiteCheck check_pipeline(Rng& rng, std::size_t instances) {
  SuiteCheck check{"pipeline", instances, 0.0, 1e-4, true};
  constexpr std::size_t kVocab = 10, kDim = 4, kPairs = 4;
  const LossKind kinds[] = {LossKind::kSosl, LossKind::kMse, LossKind::kProportionalOdds};
  for (std::size_t i = 0; i < instances; ++i) {
    TrainConfig config;
    config.loss = kinds[i % 3];
    config.epsilon = kEpsilons[rng.below(5)];
    config.dim = kDim;
    ModelParams params{EmbeddingTable("a", kVocab, kDim), EmbeddingTable("b", kVocab, kDim)};
    for (double& v : params.query.data()) v = rng.uniform(-1.0, 1.0);
    for (double& v : params.doc.data()) v = rng.uniform(-1.0, 1.0);

    std::vector<QueryRecord> queries(kPairs);
    std::vector<DocumentRecord> docs(kPairs);
    std::vector<ScoredPair> batch;
    for (std::size_t k = 0; k < kPairs; ++k) {
      queries[k].id = "q" + std::to_string(k);
      docs[k].id = "d" + std::to_string(k);
      for (int t = 0; t < 3; ++t) {
        queries[k].tokens.push_back(static_cast<TokenId>(rng.below(kVocab)));
        docs[k].tokens.push_back(static_cast<TokenId>(rng.below(kVocab)));
      }
    }
    for (std::size_t k = 0; k < kPairs; ++k) {
      batch.push_back({&queries[k], &docs[k], static_cast<int>(rng.between(1, 3))});
    }

    const auto bg = batch_loss_and_gradient(params, batch, config);
    std::vector<double> analytic(2 * kVocab * kDim, 0.0);
    for (const auto& [key, row] : bg.packet) {
      const std::size_t offset =
          (key.table == TableId::kQuery ? 0 : kVocab * kDim) + key.row * kDim;
      std::copy(row.begin(), row.end(), analytic.begin() + static_cast<long>(offset));
    }
    std::vector<double> x(params.query.data().begin(), params.query.data().end());
    x.insert(x.end(), params.doc.data().begin(), params.doc.data().end());
    const auto inner = config.thresholds.inner();
    const auto numeric = fd_gradient(
        [&](std::span<const double> w) {
          double total = 0.0;
          for (const auto& pair : batch) {
            const auto vq = reference::encode(w.first(kVocab * kDim), kDim, pair.query->tokens);
            const auto vd = reference::encode(w.subspan(kVocab * kDim), kDim, pair.doc->tokens);
            const double r = reference::smooth_cosine(vq, vd, config.epsilon);
            total += reference::loss(config.loss, r, pair.label, inner,
                                     config.loss_options.po_scale);
          }
          return total / static_cast<double>(batch.size());
        },
        x);
    const auto rep = compare_gradients(analytic, numeric, kDefaultFdStep);
    check.max_rel_error = std::max(check.max_rel_error, rep.max_rel_error);
  }
  check.passed = check.max_rel_error <= check.tolerance;
  return check;
}

}  // namespace

std::vector<SuiteCheck> run_gradcheck_suite(std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  std::vector<SuiteCheck> out;
  out.push_back(check_similarity(rng, instances));
  out.push_back(check_loss(rng, instances, LossKind::kSosl));
  out.push_back(check_loss(rng, instances, LossKind::kMse));
  out.push_back(check_loss(rng, instances, LossKind::kProportionalOdds));
  out.push_back(check_encoder(rng, instances));
  out.push_back(check_pipeline(rng, instances));
  return out;
}

void write_suite_summary(std::span<const SuiteCheck> checks, std::ostream& out) {
  out << "check\tinstances\tmax_rel_error\ttolerance\tstatus\n";
  for (const auto& c : checks) {
    out << c.name << '\t' << c.instances << '\t' << format_double(c.max_rel_error) << '\t'
        << format_double(c.tolerance) << '\t' << (c.passed ? "PASS" : "FAIL") << '\n';
  }
}

}  // namespace xlir
