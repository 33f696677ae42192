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

#include "xlir/similarity.h"

#include <cmath>
#include <limits>
#include <ostream>

#include "xlir/error.h"
#include "xlir/kv_config.h"

namespace xlir {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

void SimilarityConfig::validate() const {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw InvalidArgument("epsilon must be finite and >= 0");
  }
  if (epsilon == 0.0 && !diagnostic) {
    throw InvalidArgument(
        "epsilon = 0 (non-smooth cosine) requires diagnostic mode");
  }
}

SimilarityResult smooth_cosine(std::span<const double> q,
                               std::span<const double> d,
                               const SimilarityConfig& cfg) {
  cfg.validate();
  if (q.size() != d.size()) {
    throw InvalidArgument("smooth_cosine: dimension mismatch (" +
                          std::to_string(q.size()) + " vs " +
                          std::to_string(d.size()) + ")");
  }
  const double eps = cfg.epsilon;
  SimilarityResult res;
  res.norm_q = norm(q);
  res.norm_d = norm(d);
  if (eps == 0.0 && (res.norm_q == 0.0 || res.norm_d == 0.0)) {
    throw SingularityError("cosine similarity undefined for a zero-norm vector");
  }
  const double aq = res.norm_q + eps;
  const double ad = res.norm_d + eps;
  const double m = aq * ad;
  res.score = dot(q, d) / m;

  const std::size_t p = q.size();
  res.grad_q.resize(p);
  res.grad_d.resize(p);
  const double cq = res.norm_q > 0.0 ? res.score / (aq * res.norm_q) : 0.0;
  const double cd = res.norm_d > 0.0 ? res.score / (ad * res.norm_d) : 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    res.grad_q[j] = d[j] / m - cq * q[j];
    res.grad_d[j] = q[j] / m - cd * d[j];
  }
  res.grad_norm_q = norm(res.grad_q);
  res.grad_norm_d = norm(res.grad_d);
  return res;
}

double smooth_cosine_score(std::span<const double> q, std::span<const double> d,
                           double epsilon) {
  if (q.size() != d.size()) throw InvalidArgument("dimension mismatch");
  const double nq = norm(q), nd = norm(d);
  if (epsilon == 0.0 && (nq == 0.0 || nd == 0.0)) {
    throw SingularityError("cosine similarity undefined for a zero-norm vector");
  }
  return dot(q, d) / ((nq + epsilon) * (nd + epsilon));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  return smooth_cosine_score(a, b, 0.0);
}

double gradient_bound(const SimilarityConfig& cfg, double v_norm) {
  if (cfg.epsilon < 0.0 || v_norm < 0.0) {
    throw InvalidArgument("gradient_bound: negative epsilon or norm");
  }
  if (cfg.epsilon == 0.0 && v_norm == 0.0) {
    throw SingularityError("gradient_bound: unbounded at zero norm with epsilon = 0");
  }
  return 2.0 / (v_norm + cfg.epsilon);
}

std::vector<FieldPoint> sweep_gradient_field(const SimilarityConfig& cfg,
                                             const GridSpec& grid,
                                             std::span<const double> fixed) {
  if (fixed.size() != 2) {
    throw InvalidArgument("sweep_gradient_field: only the 2-D case is supported");
  }
  if (grid.points < 1 || !(grid.hi >= grid.lo)) {
    throw InvalidArgument("sweep_gradient_field: bad grid");
  }
  SimilarityConfig diag = cfg;
  diag.diagnostic = true;
  std::vector<FieldPoint> out;
  out.reserve(static_cast<std::size_t>(grid.points) * grid.points);
  const double span = grid.hi - grid.lo;
  const double last = grid.points > 1 ? grid.points - 1 : 1;
  for (int i = 0; i < grid.points; ++i) {
    const double x1 = grid.lo + span * i / last;
    for (int k = 0; k < grid.points; ++k) {
      const double x2 = grid.lo + span * k / last;
      const double x[2] = {x1, x2};
      FieldPoint pt{x1, x2, std::numeric_limits<double>::quiet_NaN()};
      if (!(cfg.epsilon == 0.0 && x1 == 0.0 && x2 == 0.0)) {
        pt.partial = smooth_cosine(x, fixed, diag).grad_q[0];
      }
      out.push_back(pt);
    }
  }
  return out;
}

void write_gradient_field_tsv(std::span<const FieldPoint> field, std::ostream& out) {
  out << "x1\tx2\tpartial\n";
  for (const auto& pt : field) {
    out << format_double(pt.x1) << '\t' << format_double(pt.x2) << '\t'
        << (std::isnan(pt.partial) ? std::string("nan") : format_double(pt.partial))
        << '\n';
  }
}

}  // namespace xlir
