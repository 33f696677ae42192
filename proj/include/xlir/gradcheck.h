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

#ifndef XLIR_GRADCHECK_H_
#define XLIR_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xlir/loss.h"
#include "xlir/metrics.h"

namespace xlir {

// Numerical oracles. Nothing in this module calls the analytic forward or
// backward code it is used to check: the reference_* functions below are
// separate, literal implementations of the same formulas.

using ScalarFunction = std::function<double(std::span<const double>)>;

inline constexpr double kDefaultFdStep = 1e-5;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. Throws on h <= 0
// and NumericError when f is not finite at a probe point.
std::vector<double> fd_gradient(const ScalarFunction& f, std::span<const double> x,
                                double h = kDefaultFdStep);

struct FDCoordinate {
  double analytic = 0.0;
  double numeric = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs / max(|analytic|, |numeric|, 1e-12)
};

struct FDReport {
  std::vector<FDCoordinate> coords;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  double h = kDefaultFdStep;

  bool passes(double rel_tol) const { return max_rel_error <= rel_tol; }
};

FDReport compare_gradients(std::span<const double> analytic,
                           std::span<const double> numeric, double h);

// Merges `other` into `into` (max errors, concatenated coordinates).
void merge_report(FDReport& into, const FDReport& other);

namespace reference {

// tanh of the running mean of embedding rows, summed in token order.
std::vector<double> encode(std::span<const double> table, std::size_t dim,
                           std::span<const std::int32_t> tokens);
double smooth_cosine(std::span<const double> q, std::span<const double> d,
                     double epsilon);
double sosl(double r, int y, std::span<const double> inner_thresholds);
double mse(double r, int y, std::span<const double> inner_thresholds);
double proportional_odds(double r, int y, std::span<const double> inner_thresholds,
                         double scale);
double loss(LossKind kind, double r, int y, std::span<const double> inner_thresholds,
            double po_scale);

}  // namespace reference

// Every metric recomputed from its definition: positions derived by counting,
// IDCG by enumerating orderings for lists of up to 8 entries.
QueryMetrics brute_force_metrics(const RankedList& rl);

struct SmoothnessClass {
  int y = 0;
  double tight_bound = 0.0;
  double max_abs_grad = 0.0;  // over r in [-1, 1]
  double argmax_r = 0.0;
  double max_threshold_jump = 0.0;  // |f'(t + s) - f'(t - s)| at thresholds
  double max_second_diff = 0.0;
};

struct SmoothnessReport {
  std::vector<SmoothnessClass> classes;
  double grid_step = 0.0;
  double max_abs_grad = 0.0;
  int argmax_y = 0;
  double argmax_r = 0.0;
  bool ok = true;
};

// Scans r over [-1 - margin, 1 + margin] with `grid_step`.
SmoothnessReport check_sosl_smoothness(const ThresholdVector& th, double grid_step,
                                       double margin = 0.25);

struct SuiteCheck {
  std::string name;
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Finite-difference checks of SCS, SOSL, MSE, PO, the encoder, and the
// composed pipeline on `instances` random cases each.
std::vector<SuiteCheck> run_gradcheck_suite(std::uint64_t seed, std::size_t instances);

void write_suite_summary(std::span<const SuiteCheck> checks, std::ostream& out);

}  // namespace xlir

#endif  // XLIR_GRADCHECK_H_
