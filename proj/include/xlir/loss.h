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

#ifndef XLIR_LOSS_H_
#define XLIR_LOSS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace xlir {

// Inner cut points theta_1 < ... < theta_{K-1} strictly inside (-1, 1). The
// sentinels theta_0 = -1 and theta_K = 1 are implied.
class ThresholdVector {
 public:
  ThresholdVector() : ThresholdVector({0.2, 0.7}) {}
  explicit ThresholdVector(std::vector<double> inner);

  int num_classes() const { return static_cast<int>(inner_.size()) + 1; }
  // theta_i for i in [0, K].
  double at(int i) const;
  double lower(int y) const { return at(y - 1); }
  double upper(int y) const { return at(y); }
  const std::vector<double>& inner() const { return inner_; }

  // Non-throwing validity check.
  static bool valid(const std::vector<double>& inner);

  friend bool operator==(const ThresholdVector&, const ThresholdVector&) = default;

 private:
  std::vector<double> inner_;
};

enum class LossKind { kSosl, kMse, kProportionalOdds };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);  // "sosl" | "mse" | "po"

struct LossValue {
  double value = 0.0;
  double dvalue_dr = 0.0;
  // Proportional odds only: the class probability fell below 1e-300 and was
  // clamped.
  bool underflow = false;
};

struct LossOptions {
  double po_scale = 5.0;  // logistic scale s for proportional odds
};

// Squared distance past the violated threshold; zero on [theta_{y-1}, theta_y].
LossValue sosl(double r, int y, const ThresholdVector& th);

// (r - t_y)^2 with t_y the midpoint of [theta_{y-1}, theta_y].
LossValue mse_ordinal(double r, int y, const ThresholdVector& th);

// -log(sigma(s(theta_y - r)) - sigma(s(theta_{y-1} - r))), where the sentinel
// terms are fixed at sigma(.) = 1 for y = K and 0 for y = 1.
LossValue proportional_odds(double r, int y, const ThresholdVector& th,
                            double scale = 5.0);

LossValue evaluate_loss(LossKind kind, double r, int y, const ThresholdVector& th,
                        const LossOptions& opts = {});

// max(2|1 + theta_{y-1}|, 2|1 - theta_y|): the largest |dSOSL/dr| over
// r in [-1, 1] for class y.
double sosl_gradient_bound(int y, const ThresholdVector& th);

struct ClassConstants {
  int y = 0;
  double tight_bound = 0.0;      // sosl_gradient_bound(y)
  double max_abs_grad = 0.0;     // empirical
  double max_second_diff = 0.0;  // empirical |f'(r + h) - f'(r)| / h
};

struct LossConstantsReport {
  LossKind kind = LossKind::kSosl;
  std::vector<ClassConstants> classes;
  double max_abs_grad = 0.0;
  double max_second_diff = 0.0;
  // SOSL only: every gradient within 4 and the per-class bound, every second
  // difference within 2 + 1e-6. Always true for the other losses.
  bool within_bounds = true;
};

// Samples r uniformly in [-1, 1] (endpoints included) for every class.
LossConstantsReport verify_loss_constants(LossKind kind, const ThresholdVector& th,
                                          std::size_t samples, std::uint64_t seed,
                                          const LossOptions& opts = {},
                                          double second_diff_step = 1e-4);

struct LossCurveRow {
  double r = 0.0;
  std::vector<double> loss;  // one entry per class y = 1..K
};

// Loss for every class on an evenly spaced grid over [-1, 1].
std::vector<LossCurveRow> loss_curves(LossKind kind, const ThresholdVector& th,
                                      int points, const LossOptions& opts = {});

// r TAB loss_y1 TAB ... TAB loss_yK, with a header row.
void write_loss_curves_tsv(const std::vector<LossCurveRow>& rows, std::ostream& out);

}  // namespace xlir

#endif  // XLIR_LOSS_H_
