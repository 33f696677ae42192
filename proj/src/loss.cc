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

#include "xlir/loss.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "xlir/error.h"
#include "xlir/kv_config.h"
#include "xlir/rng.h"

namespace xlir {

ThresholdVector::ThresholdVector(std::vector<double> inner)
    : inner_(std::move(inner)) {
  if (!valid(inner_)) {
    std::string text;
    for (double t : inner_) text += (text.empty() ? "" : ",") + format_double(t);
    throw InvalidArgument("thresholds must satisfy -1 < t_1 < ... < t_{K-1} < 1, got (" +
                          text + ")");
  }
}

bool ThresholdVector::valid(const std::vector<double>& inner) {
  if (inner.empty()) return false;
  double prev = -1.0;
  for (double t : inner) {
    if (!std::isfinite(t) || !(t > prev)) return false;
    prev = t;
  }
  return prev < 1.0;
}

double ThresholdVector::at(int i) const {
  if (i <= 0) return -1.0;
  if (i >= num_classes()) return 1.0;
  return inner_[static_cast<std::size_t>(i - 1)];
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kSosl: return "sosl";
    case LossKind::kMse: return "mse";
    case LossKind::kProportionalOdds: return "po";
  }
  return "?";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "sosl") return LossKind::kSosl;
  if (name == "mse") return LossKind::kMse;
  if (name == "po") return LossKind::kProportionalOdds;
  throw InvalidArgument("unknown loss '" + name + "' (expected sosl, mse or po)");
}

namespace {

void check_label(int y, const ThresholdVector& th) {
  if (y < 1 || y > th.num_classes()) {
    throw InvalidArgument("label " + std::to_string(y) + " outside [1, " +
                          std::to_string(th.num_classes()) + "]");
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

LossValue sosl(double r, int y, const ThresholdVector& th) {
  check_label(y, th);
  const double hi = th.upper(y);
  const double lo = th.lower(y);
  if (r > hi) return {(r - hi) * (r - hi), 2.0 * (r - hi)};
  if (r < lo) return {(r - lo) * (r - lo), 2.0 * (r - lo)};
  return {0.0, 0.0};
}

LossValue mse_ordinal(double r, int y, const ThresholdVector& th) {
  check_label(y, th);
  const double target = 0.5 * (th.lower(y) + th.upper(y));
  return {(r - target) * (r - target), 2.0 * (r - target)};
}

LossValue proportional_odds(double r, int y, const ThresholdVector& th,
                            double scale) {
  check_label(y, th);
  if (!(scale > 0.0)) throw InvalidArgument("po_scale must be positive");
  const int k = th.num_classes();
  const double s = scale;
  if (y == 1) {
    // -log sigma(x), x = s(theta_1 - r)
    const double x = s * (th.upper(1) - r);
    return {softplus(-x), s * sigmoid(-x)};
  }
  if (y == k) {
    // -log(1 - sigma(x)) = -log sigma(-x), x = s(theta_{K-1} - r)
    const double x = s * (th.lower(k) - r);
    return {softplus(x), -s * sigmoid(x)};
  }
  const double xu = s * (th.upper(y) - r);
  const double xl = s * (th.lower(y) - r);
  // Subtract complements when both sigmoids are near 1.
  double diff = xl > 0.0 ? sigmoid(-xl) - sigmoid(-xu) : sigmoid(xu) - sigmoid(xl);
  LossValue out;
  if (!(diff > 1e-300)) {
    diff = 1e-300;
    out.underflow = true;
  }
  out.value = -std::log(diff);
  // a(1-a) = sigma(x) sigma(-x)
  const double da = sigmoid(xu) * sigmoid(-xu);
  const double db = sigmoid(xl) * sigmoid(-xl);
  out.dvalue_dr = s * (da - db) / diff;
  return out;
}

LossValue evaluate_loss(LossKind kind, double r, int y, const ThresholdVector& th,
                        const LossOptions& opts) {
  switch (kind) {
    case LossKind::kSosl: return sosl(r, y, th);
    case LossKind::kMse: return mse_ordinal(r, y, th);
    case LossKind::kProportionalOdds: return proportional_odds(r, y, th, opts.po_scale);
  }
  throw InvalidArgument("unknown loss kind");
}

double sosl_gradient_bound(int y, const ThresholdVector& th) {
  check_label(y, th);
  return std::max(2.0 * std::abs(1.0 + th.lower(y)), 2.0 * std::abs(1.0 - th.upper(y)));
}

LossConstantsReport verify_loss_constants(LossKind kind, const ThresholdVector& th,
                                          std::size_t samples, std::uint64_t seed,
                                          const LossOptions& opts,
                                          double second_diff_step) {
  LossConstantsReport report;
  report.kind = kind;
  Rng rng(seed);
  const double h = second_diff_step;
  for (int y = 1; y <= th.num_classes(); ++y) {
    ClassConstants c;
    c.y = y;
    c.tight_bound = sosl_gradient_bound(y, th);
    auto probe = [&](double r) {
      const double g = evaluate_loss(kind, r, y, th, opts).dvalue_dr;
      c.max_abs_grad = std::max(c.max_abs_grad, std::abs(g));
      if (r + h <= 1.0) {
        const double g2 = evaluate_loss(kind, r + h, y, th, opts).dvalue_dr;
        c.max_second_diff = std::max(c.max_second_diff, std::abs(g2 - g) / h);
      }
    };
    probe(-1.0);
    probe(1.0);
    for (std::size_t i = 0; i < samples; ++i) probe(rng.uniform(-1.0, 1.0));
    report.max_abs_grad = std::max(report.max_abs_grad, c.max_abs_grad);
    report.max_second_diff = std::max(report.max_second_diff, c.max_second_diff);
    if (kind == LossKind::kSosl &&
        (c.max_abs_grad > c.tight_bound + 1e-12 || c.max_abs_grad > 4.0 ||
         c.max_second_diff > 2.0 + 1e-6)) {
      report.within_bounds = false;
    }
    report.classes.push_back(c);
  }
  return report;
}

std::vector<LossCurveRow> loss_curves(LossKind kind, const ThresholdVector& th,
                                      int points, const LossOptions& opts) {
  if (points < 2) throw InvalidArgument("loss_curves: need at least 2 points");
  std::vector<LossCurveRow> rows;
  rows.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    LossCurveRow row;
    // Integer-ratio spacing keeps grid points such as 0 and 0.5 exact.
    row.r = -1.0 + 2.0 * static_cast<double>(i) / (points - 1);
    for (int y = 1; y <= th.num_classes(); ++y) {
      row.loss.push_back(evaluate_loss(kind, row.r, y, th, opts).value);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_loss_curves_tsv(const std::vector<LossCurveRow>& rows, std::ostream& out) {
  out << "r";
  const std::size_t k = rows.empty() ? 0 : rows.front().loss.size();
  for (std::size_t y = 1; y <= k; ++y) out << "\tloss_y" << y;
  out << '\n';
  for (const auto& row : rows) {
    out << format_double(row.r);
    for (double v : row.loss) out << '\t' << format_double(v);
    out << '\n';
  }
}

}  // namespace xlir
