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

#include "doctest.h"
#include "xlir/error.h"
#include "xlir/optim.h"
#include "xlir/rng.h"

using namespace xlir;

namespace {

ModelParams small_params(std::size_t vocab = 3, std::size_t dim = 2) {
  return ModelParams{EmbeddingTable("a", vocab, dim), EmbeddingTable("b", vocab, dim)};
}

GradientPacket packet(std::size_t dim, TableId t, TokenId row, std::vector<double> g) {
  GradientPacket p(dim);
  p.accumulate({t, row}, g);
  return p;
}

}  // namespace

TEST_CASE("first Adam step moves by about lr against the gradient") {
  auto params = small_params();
  auto state = OptimizerState::adam({}, params);
  apply_adam(state, params, packet(2, TableId::kQuery, 1, {0.3, -7.0}));
  CHECK(params.query.row(1)[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(params.query.row(1)[1] == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(params.query.row(0)[0] == 0.0);
  CHECK(params.doc.row(1)[0] == 0.0);
  CHECK(state.step() == 1);
}

TEST_CASE("an empty packet advances the step without moving parameters") {
  auto params = small_params();
  params.doc.row(2)[1] = 0.5;
  const auto before = params;
  auto state = OptimizerState::adam({}, params);
  apply_adam(state, params, GradientPacket(2));
  CHECK(params == before);
  CHECK(state.step() == 1);
  CHECK(clip_gradients(GradientPacket(2), 5.0).empty());
}

TEST_CASE("Adam with a constant gradient never grows its step") {
  auto params = small_params();
  auto state = OptimizerState::adam({}, params);
  const auto g = packet(2, TableId::kDocument, 2, {0.5, 0.5});
  double prev = 0.0, prev_step = 1.0;
  for (int t = 0; t < 20; ++t) {
    apply_adam(state, params, g);
    const double w = params.doc.row(2)[0];
    const double step = std::abs(w - prev);
    CHECK(step <= prev_step + 1e-15);
    prev_step = step;
    prev = w;
  }
}

TEST_CASE("sgd_ct follows the harmonic schedule") {
  auto params = small_params();
  auto state = OptimizerState::sgd_ct(0.5);
  const auto g = packet(2, TableId::kQuery, 0, {1.0, -2.0});
  double harmonic = 0.0;
  for (int t = 1; t <= 50; ++t) {
    apply_sgd_ct(state, params, g);
    harmonic += 1.0 / t;
  }
  CHECK(params.query.row(0)[0] == doctest::Approx(-0.5 * harmonic).epsilon(1e-13));
  CHECK(params.query.row(0)[1] == doctest::Approx(1.0 * harmonic).epsilon(1e-13));
}

TEST_CASE("sgd_ct with c = 1 over four steps") {
  auto params = small_params();
  auto state = OptimizerState::sgd_ct(1.0);
  const auto ones = packet(2, TableId::kDocument, 1, {1.0, 1.0});
  apply_sgd_ct(state, params, ones);
  CHECK(params.doc.row(1)[0] == -1.0);
  for (int t = 2; t <= 4; ++t) apply_sgd_ct(state, params, ones);
  CHECK(params.doc.row(1)[1] == doctest::Approx(-(1.0 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4)));
}

TEST_CASE("sparse sgd_ct equals the dense update bitwise") {
  Rng rng(3);
  auto params = small_params(5, 3);
  for (double& x : params.query.data()) x = rng.uniform(-1.0, 1.0);
  std::vector<double> dense(params.query.data().begin(), params.query.data().end());
  auto state = OptimizerState::sgd_ct(0.3);
  for (int t = 1; t <= 10; ++t) {
    GradientPacket g(3);
    std::vector<double> full(dense.size(), 0.0);
    const auto row = static_cast<TokenId>(rng.below(5));
    for (std::size_t j = 0; j < 3; ++j) full[static_cast<std::size_t>(row) * 3 + j] = rng.uniform(-1.0, 1.0);
    g.accumulate({TableId::kQuery, row}, std::span<const double>(full).subspan(static_cast<std::size_t>(row) * 3, 3));
    apply_sgd_ct(state, params, g);
    const double lr = 0.3 / t;
    for (std::size_t i = 0; i < dense.size(); ++i) dense[i] -= lr * full[i];
  }
  for (std::size_t i = 0; i < dense.size(); ++i) CHECK(params.query.data()[i] == dense[i]);
}

TEST_CASE("sgd_ct with c = 0 leaves parameters untouched") {
  auto params = small_params();
  params.query.row(1)[0] = 0.25;
  const auto before = params;
  auto state = OptimizerState::sgd_ct(0.0);
  for (int t = 0; t < 5; ++t) apply_update(state, params, packet(2, TableId::kQuery, 1, {3.0, 4.0}));
  CHECK(params == before);
  CHECK(state.step() == 5);
  CHECK_THROWS_AS(OptimizerState::sgd_ct(-1.0), InvalidArgument);
}

TEST_CASE("clipping") {
  GradientPacket g(2);
  g.accumulate({TableId::kQuery, 0}, std::vector<double>{6.0, 0.0});
  g.accumulate({TableId::kDocument, 1}, std::vector<double>{0.0, 8.0});
  CHECK(g.global_norm() == 10.0);
  auto once = clip_gradients(g, 5.0);
  CHECK(once.global_norm() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK((*once.find({TableId::kQuery, 0}))[0] == doctest::Approx(3.0));
  auto twice = once;
  CHECK(!clip_in_place(twice, 5.0));
  for (const auto& [key, row] : once) CHECK(*twice.find(key) == row);
  auto loose = g;
  CHECK(!clip_in_place(loose, 20.0));
  CHECK(loose.global_norm() == 10.0);
  CHECK_THROWS_AS(clip_in_place(loose, 0.0), InvalidArgument);
}

TEST_CASE("clipping is idempotent on random packets") {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    GradientPacket g(3);
    const int rows = 1 + static_cast<int>(rng.below(5));
    for (int i = 0; i < rows; ++i) {
      std::vector<double> v(3);
      for (double& x : v) x = rng.uniform(-100.0, 100.0);
      g.accumulate({TableId::kQuery, static_cast<TokenId>(i)}, v);
    }
    const double threshold = rng.uniform(0.1, 50.0);
    const auto once = clip_gradients(g, threshold);
    CHECK(once.global_norm() <= threshold * (1 + 1e-12));
    auto twice = once;
    clip_in_place(twice, threshold);
    for (const auto& [key, row] : once) REQUIRE(*twice.find(key) == row);
  }
}

TEST_CASE("lazy Adam equals dense Adam when every row is touched") {
  Rng rng(2);
  const std::size_t vocab = 4, dim = 3;
  auto params = small_params(vocab, dim);
  for (double& x : params.query.data()) x = rng.uniform(-1.0, 1.0);
  std::vector<double> w(params.query.data().begin(), params.query.data().end());
  std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0);
  const AdamConfig c;
  auto state = OptimizerState::adam(c, params);
  for (int t = 1; t <= 30; ++t) {
    GradientPacket g(dim);
    std::vector<double> dense(w.size());
    for (double& x : dense) x = rng.uniform(-1.0, 1.0);
    for (std::size_t r = 0; r < vocab; ++r) {
      g.accumulate({TableId::kQuery, static_cast<TokenId>(r)},
                   std::span<const double>(dense).subspan(r * dim, dim));
    }
    apply_adam(state, params, g);
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1 - c.beta1) * dense[i];
      v[i] = c.beta2 * v[i] + (1 - c.beta2) * dense[i] * dense[i];
      const double mh = m[i] / (1 - std::pow(c.beta1, t));
      const double vh = v[i] / (1 - std::pow(c.beta2, t));
      w[i] -= c.lr * mh / (std::sqrt(vh) + c.eps);
    }
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(params.query.data()[i] == doctest::Approx(w[i]).epsilon(1e-12));
  }
}

TEST_CASE("non-finite gradients are rejected without side effects") {
  auto params = small_params();
  auto state = OptimizerState::adam({}, params);
  apply_adam(state, params, packet(2, TableId::kQuery, 1, {1.0, 1.0}));
  const auto params_before = params;
  auto bad = packet(2, TableId::kQuery, 0, {0.1, 0.1});
  bad.accumulate({TableId::kDocument, 2}, std::vector<double>{NAN, 0.0});
  try {
    apply_adam(state, params, bad);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  CHECK(params == params_before);
  CHECK(state.step() == 1);

  auto sgd = OptimizerState::sgd_ct(1.0);
  CHECK_THROWS_AS(apply_sgd_ct(sgd, params, bad), NumericError);
  CHECK(sgd.step() == 0);
  CHECK(params == params_before);

  CHECK_THROWS_AS(apply_adam(state, params, packet(2, TableId::kQuery, 7, {1.0, 1.0})),
                  InvalidArgument);
  CHECK_THROWS_AS(apply_sgd_ct(state, params, packet(2, TableId::kQuery, 0, {1.0, 1.0})),
                  InvalidArgument);
}
