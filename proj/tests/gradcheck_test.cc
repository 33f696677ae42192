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

using namespace xlir;

TEST_CASE("central differences are second order") {
  // f(x) = sin(x0) * exp(x1); the error should fall by ~100 when h drops 10x.
  auto f = [](std::span<const double> x) { return std::sin(x[0]) * std::exp(x[1]); };
  const std::vector<double> x = {0.7, -0.3};
  const std::vector<double> exact = {std::cos(0.7) * std::exp(-0.3),
                                     std::sin(0.7) * std::exp(-0.3)};
  auto err = [&](double h) {
    return compare_gradients(exact, fd_gradient(f, x, h), h).max_abs_error;
  };
  const double e1 = err(1e-2), e2 = err(1e-3);
  CHECK(e1 / e2 > 50.0);
  CHECK(e1 / e2 < 200.0);
  CHECK_THROWS_AS(fd_gradient(f, x, 0.0), InvalidArgument);
  auto bad = [](std::span<const double> v) { return std::log(v[0]); };
  const std::vector<double> at_zero = {0.0};
  CHECK_THROWS_AS(fd_gradient(bad, at_zero), NumericError);
}

TEST_CASE("compare_gradients uses a floored relative error") {
  const std::vector<double> a = {1.0, 0.0}, n = {1.1, 1e-13};
  const auto rep = compare_gradients(a, n, 1e-5);
  CHECK(rep.coords[0].rel_error == doctest::Approx(0.1 / 1.1));
  CHECK(rep.coords[1].rel_error == doctest::Approx(0.1));
  CHECK(rep.max_abs_error == doctest::Approx(0.1));
  CHECK(!rep.passes(0.05));
}

TEST_CASE("SOSL smoothness scan locates the steepest point") {
  const ThresholdVector th({0.2, 0.7});
  const auto rep = check_sosl_smoothness(th, 1e-4);
  CHECK(rep.ok);
  CHECK(rep.max_abs_grad == doctest::Approx(3.4).epsilon(1e-12));
  CHECK(rep.argmax_y == 3);
  CHECK(rep.argmax_r == -1.0);
  for (const auto& c : rep.classes) CHECK(c.max_second_diff <= 2.0 + 1e-6);
  CHECK_THROWS_AS(check_sosl_smoothness(th, 0.0), InvalidArgument);
}

TEST_CASE("reference losses agree with hand values") {
  const std::vector<double> th = {0.2, 0.7};
  CHECK(reference::sosl(0.9, 2, th) == doctest::Approx(0.04));
  CHECK(reference::sosl(-1.0, 2, th) == doctest::Approx(1.44));
  CHECK(reference::mse(0.2, 1, th) == doctest::Approx(0.36));
  const std::vector<double> v = {1.0, 1.0};
  CHECK(reference::smooth_cosine(v, v, 1.0) ==
        doctest::Approx(2.0 / ((std::sqrt(2.0) + 1) * (std::sqrt(2.0) + 1))));
  const double table[] = {0.0, 0.0, 1.0, -1.0};
  const std::int32_t tok[] = {1};
  const auto enc = reference::encode(table, 2, tok);
  CHECK(enc[0] == doctest::Approx(std::tanh(1.0)));
  CHECK(enc[1] == doctest::Approx(std::tanh(-1.0)));
}

TEST_CASE("full gradient check suite passes") {
  const auto checks = run_gradcheck_suite(1, 100);
  CHECK(checks.size() >= 6);
  for (const auto& c : checks) {
    INFO(c.name);
    CHECK(c.instances > 0);
    CHECK(c.passed);
    CHECK(c.max_rel_error <= c.tolerance);
  }
  std::ostringstream out;
  write_suite_summary(checks, out);
  CHECK(out.str().find('\t') != std::string::npos);
}
