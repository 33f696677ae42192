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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "test_util.h"
#include "xlir/encoder.h"
#include "xlir/error.h"
#include "xlir/gradcheck.h"
#include "xlir/rng.h"

using namespace xlir;
using xlir::testing::TempDir;

namespace {

EmbeddingTable random_table(std::size_t vocab, std::size_t dim, std::uint64_t seed,
                            double scale = 1.0) {
  return init_embeddings(vocab, dim, seed, scale, "t");
}

std::vector<double> dense_gradient(const GradientPacket& packet, std::size_t vocab,
                                   std::size_t dim) {
  std::vector<double> out(vocab * dim, 0.0);
  for (const auto& [key, row] : packet) {
    std::copy(row.begin(), row.end(), out.begin() + key.row * static_cast<long>(dim));
  }
  return out;
}

}  // namespace

TEST_CASE("zero rows encode to the zero vector") {
  EmbeddingTable t("a", 4, 3);
  const TokenId toks[] = {1, 2, 3};
  const auto v = encode(t, toks);
  for (double x : v.values) CHECK(x == 0.0);
  CHECK(v.length == 3);
}

TEST_CASE("single token output is tanh of its row") {
  EmbeddingTable t("a", 2, 2);
  t.row(1)[0] = 0.5;
  t.row(1)[1] = -0.5;
  const TokenId tok[] = {1};
  const auto v = encode(t, tok);
  CHECK(v.values[0] == std::tanh(0.5));
  CHECK(v.values[1] == std::tanh(-0.5));
  CHECK(v.pre_activation[0] == 0.5);
}

TEST_CASE("repeated token matches the single token exactly") {
  const auto t = random_table(5, 7, 1);
  const TokenId once[] = {3};
  const TokenId thrice[] = {3, 3, 3};
  CHECK(encode(t, once).values == encode(t, thrice).values);
}

TEST_CASE("pooling is exactly permutation invariant") {
  const auto t = random_table(50, 16, 2);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenId> toks(1 + rng.below(20));
    for (auto& x : toks) x = static_cast<TokenId>(rng.below(50));
    const auto base = encode(t, toks).values;
    rng.shuffle(std::span<TokenId>(toks));
    CHECK(encode(t, toks).values == base);
  }
}

TEST_CASE("one-row perturbation moves each output by at most delta / l") {
  auto t = random_table(10, 6, 4);
  const TokenId toks[] = {1, 2, 3, 4};
  const auto before = encode(t, toks);
  const double delta = 0.3;
  for (double& x : t.row(2)) x += delta;
  const auto after = encode(t, toks);
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(std::abs(after.pre_activation[j] - before.pre_activation[j]) ==
          doctest::Approx(delta / 4).epsilon(1e-12));
    CHECK(std::abs(after.values[j] - before.values[j]) <= delta / 4 + 1e-15);
  }
}

TEST_CASE("encode rejects empty and out-of-range input") {
  const auto t = random_table(3, 2, 5);
  CHECK_THROWS_AS(encode(t, std::span<const TokenId>{}), InvalidArgument);
  const TokenId bad[] = {1, 3};
  CHECK_THROWS_AS(encode(t, bad), InvalidArgument);
  const TokenId neg[] = {-1};
  CHECK_THROWS_AS(encode(t, neg), InvalidArgument);
}

TEST_CASE("backward: zero upstream gives a zero packet") {
  const auto t = random_table(4, 3, 6);
  const TokenId toks[] = {0, 2};
  const auto v = encode(t, toks);
  const std::vector<double> zero(3, 0.0);
  const auto g = encode_backward(t, TableId::kQuery, toks, v, zero);
  CHECK(g.global_norm() == 0.0);
}

TEST_CASE("backward: single token at the origin passes upstream through") {
  EmbeddingTable t("a", 3, 3);
  const TokenId tok[] = {2};
  const auto v = encode(t, tok);
  const std::vector<double> u = {0.25, -1.5, 3.0};
  const auto g = encode_backward(t, TableId::kDocument, tok, v, u);
  REQUIRE(g.size() == 1);
  CHECK(*g.find({TableId::kDocument, 2}) == u);
}

TEST_CASE("backward: repeated tokens accumulate") {
  const auto t = random_table(4, 2, 7);
  const TokenId toks[] = {1, 1, 2};
  const auto v = encode(t, toks);
  const std::vector<double> u = {1.0, -1.0};
  const auto g = encode_backward(t, TableId::kQuery, toks, v, u);
  const auto& r1 = *g.find({TableId::kQuery, 1});
  const auto& r2 = *g.find({TableId::kQuery, 2});
  for (std::size_t j = 0; j < 2; ++j) {
    const double local = u[j] * (1.0 - v.values[j] * v.values[j]);
    CHECK(r1[j] == doctest::Approx(2.0 * local / 3.0).epsilon(1e-14));
    CHECK(r2[j] == doctest::Approx(local / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("backward matches central differences on random instances") {
  Rng rng(8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = 1 + rng.below(8);
    const std::size_t vocab = 6;
    auto t = random_table(vocab, p, 100 + trial);
    std::vector<TokenId> toks(1 + rng.below(5));
    for (auto& x : toks) x = static_cast<TokenId>(rng.below(vocab));
    std::vector<double> u(p);
    for (double& x : u) x = rng.uniform(-1.0, 1.0);
    const auto v = encode(t, toks);
    const auto analytic =
        dense_gradient(encode_backward(t, TableId::kQuery, toks, v, u), vocab, p);
    const auto numeric = fd_gradient(
        [&](std::span<const double> w) {
          const auto out = reference::encode(w, p, toks);
          double s = 0.0;
          for (std::size_t j = 0; j < p; ++j) s += u[j] * out[j];
          return s;
        },
        t.data());
    worst = std::max(worst, compare_gradients(analytic, numeric, kDefaultFdStep).max_rel_error);
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("backward rejects mismatched shapes") {
  const auto t = random_table(4, 3, 9);
  const TokenId toks[] = {1, 2};
  const auto v = encode(t, toks);
  const std::vector<double> short_u = {1.0, 2.0};
  CHECK_THROWS_AS(encode_backward(t, TableId::kQuery, toks, v, short_u), InvalidArgument);
  const TokenId other[] = {1};
  const std::vector<double> u = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(encode_backward(t, TableId::kQuery, other, v, u), InvalidArgument);
}

TEST_CASE("initialization range and determinism") {
  const auto a = init_embeddings(100, 64, 42, default_init_scale(64));
  CHECK(default_init_scale(64) == 0.0078125);
  double max_abs = 0.0;
  for (double x : a.data()) max_abs = std::max(max_abs, std::abs(x));
  CHECK(max_abs <= 0.0078125);
  CHECK(max_abs > 0.007);
  CHECK(init_embeddings(100, 64, 42, default_init_scale(64)) == a);
  CHECK(!(init_embeddings(100, 64, 43, default_init_scale(64)) == a));

  const auto tiny = init_embeddings(10, 4, 1, 1e-9);
  for (double x : tiny.data()) CHECK(std::abs(x) <= 1e-9);
  CHECK_THROWS_AS(init_embeddings(10, 4, 1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(init_embeddings(10, 4, 1, -1.0), InvalidArgument);
}

TEST_CASE("checkpoint round-trip is lossless") {
  Checkpoint ck{{random_table(7, 5, 10), random_table(9, 5, 11)}, 1234, 56};
  ck.params.query.row(3)[2] = 1.0 / 3.0;
  ck.params.doc.row(0)[0] = -4.9406564584124654e-324;
  TempDir dir("ckpt");
  save_checkpoint(ck, dir / "c.txt");
  const Checkpoint back = load_checkpoint(dir / "c.txt");
  CHECK(back.params == ck.params);
  CHECK(back.seed == 1234);
  CHECK(back.step == 56);

  xlir::testing::write_file(dir / "bad.txt", "xlir-checkpoint 1\nmanifest seed=1 step=0\n"
                                             "table a 1 2\n0.5\n");
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.txt"), FormatError);
  xlir::testing::write_file(dir / "junk.txt", "hello\n");
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.txt"), FormatError);
}
