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

#ifndef XLIR_SIMILARITY_H_
#define XLIR_SIMILARITY_H_

#include <iosfwd>
#include <span>
#include <vector>

#include "xlir/encoder.h"

namespace xlir {

struct SimilarityConfig {
  // Smoothing added to each norm in the denominator. 0 gives plain cosine and
  // is accepted only with `diagnostic` set.
  double epsilon = 1.0;
  bool diagnostic = false;

  void validate() const;
};

struct SimilarityResult {
  double score = 0.0;
  std::vector<double> grad_q;
  std::vector<double> grad_d;
  double norm_q = 0.0;
  double norm_d = 0.0;
  double grad_norm_q = 0.0;
  double grad_norm_d = 0.0;
};

// r = <q, d> / ((|q| + eps)(|d| + eps)) and its gradients
//   dr/dq = d / M - r q / ((|q| + eps)|q|),  M = (|q| + eps)(|d| + eps)
// (symmetrically for d). At q = 0 the second term takes its limit, 0.
// Throws SingularityError when eps = 0 and either norm is exactly zero.
SimilarityResult smooth_cosine(std::span<const double> q,
                               std::span<const double> d,
                               const SimilarityConfig& cfg);

inline SimilarityResult smooth_cosine(const EncodedVector& q,
                                      const EncodedVector& d,
                                      const SimilarityConfig& cfg) {
  return smooth_cosine(q.values, d.values, cfg);
}

// Score only; skips gradient work.
double smooth_cosine_score(std::span<const double> q, std::span<const double> d,
                           double epsilon);

// Plain cosine; throws SingularityError on a zero vector.
double cosine(std::span<const double> a, std::span<const double> b);

// Tight per-point gradient bound 2 / (|v| + eps).
double gradient_bound(const SimilarityConfig& cfg, double v_norm);

struct GridSpec {
  double lo = -2.0;
  double hi = 2.0;
  int points = 81;  // per axis, endpoints included
};

struct FieldPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double partial = 0.0;  // dr/dx1; NaN where undefined (eps = 0 at origin)
};

// dr/dx1 of r((x1, x2), fixed) over a square grid. `fixed` must be 2-D.
std::vector<FieldPoint> sweep_gradient_field(const SimilarityConfig& cfg,
                                             const GridSpec& grid,
                                             std::span<const double> fixed);

// x1 TAB x2 TAB partial, with a header row.
void write_gradient_field_tsv(std::span<const FieldPoint> field, std::ostream& out);

}  // namespace xlir

#endif  // XLIR_SIMILARITY_H_
