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
#include "test_util.h"
#include "xlir/error.h"
#include "xlir/gradcheck.h"
#include "xlir/trainer.h"

using namespace xlir;
using xlir::testing::TempDir;

namespace {

// One query, its MR document sharing the query's mapped tokens, one NR
// document with unrelated tokens.
CorpusSplit separable_split() {
  auto va = Vocabulary::from_tokens("a", {"<unk>", "x", "y", "z"});
  auto vb = Vocabulary::from_tokens("b", {"<unk>", "X", "Y", "Z", "W"});
  std::vector<QueryRecord> q = {{"q0", {1, 2}}};
  std::vector<DocumentRecord> d = {{"mr", {1, 2, 2}}, {"nr", {3, 4}}};
  std::vector<LabeledTriple> t = {{"q0", "mr", kRelevant}, {"q0", "nr", kIrrelevant}};
  CorpusSplit s;
  s.corpus = Corpus(va, vb, q, d, t);
  s.train_queries = {"q0"};
  s.test_queries = {"q0"};
  s.train = t;
  s.test = t;
  return s;
}

SyntheticConfig small_synthetic() {
  SyntheticConfig c;
  c.vocab_size_a = 200;
  c.vocab_size_b = 200;
  c.n_queries = 40;
  c.nr_per_query = 8;
  c.sr_mean = 1.0;
  c.query_len_range = {3, 6};
  c.doc_len_range = {5, 10};
  return c;
}

TrainConfig small_train(int epochs = 3) {
  TrainConfig c;
  c.dim = 8;
  c.epochs = epochs;
  c.batch_size = 16;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("separable toy problem is learned") {
  const auto split = separable_split();
  TrainConfig c = small_train(200);
  c.batch_size = 2;
  const auto res = train(c, split);
  REQUIRE(res.history.size() == 201);
  CHECK(res.history.front().epoch == 0);
  CHECK(res.history.back().train_loss < 0.5 * res.history.front().train_loss);
  REQUIRE(res.test.has_value());
  CHECK(res.test->get(Metric::kPrecisionMrAt1) == 1.0);
  CHECK(res.max_similarity_grad_norm > 0.0);
  CHECK(res.final_checkpoint.step == 200);
}

TEST_CASE("zero epochs returns the initial model") {
  const auto split = separable_split();
  const TrainConfig c = small_train(0);
  const auto res = train(c, split);
  CHECK(res.history.size() == 1);
  CHECK(res.final_checkpoint.step == 0);
  CHECK(res.final_checkpoint.params == init_model(split.corpus, c));

  TrainConfig frozen = small_train(5);
  frozen.optimizer = OptimizerRule::kSgdDecay;
  frozen.sgd_c = 0.0;
  const auto res2 = train(frozen, split);
  CHECK(res2.final_checkpoint.step == 5);
  CHECK(res2.final_checkpoint.params == init_model(split.corpus, frozen));

  TrainConfig capped = small_train(50);
  capped.max_steps = 0;
  CHECK(train(capped, split).final_checkpoint.step == 0);
}

TEST_CASE("training is bit-for-bit reproducible") {
  const auto split = generate_synthetic(small_synthetic(), 5);
  const TrainConfig c = small_train(3);
  TempDir a("run_a"), b("run_b");
  const auto ra = train(c, split, {a.path(), nullptr, true});
  const auto rb = train(c, split, {b.path(), nullptr, true});
  CHECK(ra.manifest.str() == rb.manifest.str());
  CHECK(ra.final_checkpoint.params == rb.final_checkpoint.params);
  for (const char* f : {"manifest.jsonl", "checkpoint_final.txt", "checkpoint_best.txt"}) {
    CHECK(xlir::testing::read_file(a / f) == xlir::testing::read_file(b / f));
  }
  const auto reloaded = load_checkpoint(a / "checkpoint_final.txt");
  CHECK(reloaded.params == ra.final_checkpoint.params);

  TrainConfig other = c;
  other.seed = 4;
  CHECK(!(train(other, split).final_checkpoint.params == ra.final_checkpoint.params));

  // Manifest: config line, epochs 0..3, final line.
  CHECK(ra.manifest.lines().size() == 6);
  CHECK(ra.manifest.lines().front().find("\"config\"") != std::string::npos);
}

TEST_CASE("batch gradient matches finite differences of the reference pipeline") {
  const auto split = generate_synthetic(small_synthetic(), 6);
  for (LossKind kind : {LossKind::kSosl, LossKind::kMse, LossKind::kProportionalOdds}) {
    TrainConfig c = small_train();
    c.dim = 3;
    c.loss = kind;
    c.init_scale = 1.0;
    const ModelParams params = init_model(split.corpus, c);
    const auto pairs = resolve_pairs(split.corpus, std::span(split.train).first(6));
    const auto bg = batch_loss_and_gradient(params, pairs, c);

    const std::size_t na = params.query.data().size();
    std::vector<double> flat(params.query.data().begin(), params.query.data().end());
    flat.insert(flat.end(), params.doc.data().begin(), params.doc.data().end());
    auto f = [&](std::span<const double> w) {
      double sum = 0.0;
      for (const auto& p : pairs) {
        const auto vq = reference::encode(w.first(na), c.dim, p.query->tokens);
        const auto vd = reference::encode(w.subspan(na), c.dim, p.doc->tokens);
        const double r = reference::smooth_cosine(vq, vd, c.epsilon);
        sum += reference::loss(kind, r, p.label, c.thresholds.inner(), 5.0);
      }
      return sum / static_cast<double>(pairs.size());
    };
    CHECK(bg.mean_loss == doctest::Approx(f(flat)).epsilon(1e-12));

    std::vector<double> analytic(flat.size(), 0.0);
    for (const auto& [key, row] : bg.packet) {
      const std::size_t off = (key.table == TableId::kQuery ? 0 : na) +
                              static_cast<std::size_t>(key.row) * c.dim;
      for (std::size_t j = 0; j < c.dim; ++j) analytic[off + j] = row[j];
    }
    const auto numeric = fd_gradient(f, flat);
    const auto rep = compare_gradients(analytic, numeric, kDefaultFdStep);
    CHECK(rep.max_abs_error < 1e-7);
  }
}

TEST_CASE("untrained random model ranks at chance") {
  SyntheticConfig sc = small_synthetic();
  sc.n_queries = 400;
  const auto split = generate_synthetic(sc, 7);
  TrainConfig c = small_train();
  c.init_scale = 1.0;
  const auto params = init_model(split.corpus, c);
  const auto ev = evaluate(params, split.corpus, split.corpus.triples(), c.similarity());

  std::map<std::string, int> candidates;
  for (const auto& t : split.corpus.triples()) ++candidates[t.query_id];
  double mean = 0.0, var = 0.0;
  for (const auto& [q, n] : candidates) {
    const double p = 1.0 / n;
    mean += p;
    var += p * (1 - p);
  }
  const double n = static_cast<double>(candidates.size());
  mean /= n;
  const double sigma = std::sqrt(var) / n;
  CHECK(std::abs(ev.report.get(Metric::kPrecisionMrAt1) - mean) <= 3 * sigma);
}

TEST_CASE("invalid inputs are rejected") {
  auto split = separable_split();
  const TrainConfig c = small_train();
  const auto params = init_model(split.corpus, c);
  CHECK_THROWS_AS(evaluate(params, split.corpus, std::span<const LabeledTriple>{},
                           c.similarity()),
                  InvalidArgument);
  auto empty = split;
  empty.train.clear();
  CHECK_THROWS_AS(train(c, empty), InvalidArgument);

  TrainConfig four = c;
  four.thresholds = ThresholdVector({-0.2, 0.2, 0.6});
  CHECK_THROWS_AS(train(four, split), InvalidArgument);

  TrainConfig nonsmooth = c;
  nonsmooth.epsilon = 0.0;
  CHECK_THROWS_AS(nonsmooth.validate(), InvalidArgument);
  nonsmooth.force_nonsmooth = true;
  CHECK_NOTHROW(nonsmooth.validate());

  TrainConfig wrong_dim = c;
  wrong_dim.dim = 5;
  CHECK_THROWS_AS(evaluate(init_model(split.corpus, wrong_dim),
                           Corpus(Vocabulary::from_tokens("a", {"<unk>"}),
                                  split.corpus.vocab_b(), {}, {}, {}),
                           split.test, c.similarity()),
                  std::exception);
}

TEST_CASE("config key-value round trip") {
  TrainConfig c = small_train();
  c.loss = LossKind::kProportionalOdds;
  c.thresholds = ThresholdVector({0.1, 0.6});
  c.clip = 2.5;
  c.max_steps = 17;
  c.optimizer = OptimizerRule::kSgdDecay;
  const auto back = TrainConfig::from_key_values(c.to_key_values());
  CHECK(back.to_key_values().entries() == c.to_key_values().entries());
  CHECK(back.thresholds == c.thresholds);
  CHECK(*back.clip == 2.5);
  CHECK(*back.max_steps == 17);
}

TEST_CASE("density summary") {
  const ThresholdVector th({0.2, 0.7});
  const std::vector<DensitySample> s = {{1, 0.0}, {1, 0.5}, {2, 0.3}, {3, 0.75}, {3, 0.1}};
  const auto sum = summarize_density(s, th);
  CHECK(sum.class_count == std::vector<std::size_t>{2, 1, 2});
  CHECK(sum.class_mean[0] == doctest::Approx(0.25));
  CHECK(sum.class_mean[2] == doctest::Approx(0.425));
  CHECK(sum.fraction_in_segment == doctest::Approx(0.6));
  std::ostringstream out;
  write_density_tsv(s, out);
  CHECK(out.str().rfind("y\tr\n1\t0\n", 0) == 0);
}

TEST_CASE("experiment drivers") {
  const auto split = generate_synthetic(small_synthetic(), 8);
  const TrainConfig base = small_train(2);

  SUBCASE("loss comparison requires a shared seed") {
    std::vector<TrainConfig> runs = {base, base};
    runs[1].seed = base.seed + 1;
    CHECK_THROWS_AS(experiment_loss_comparison(runs, split), InvalidArgument);
    const LossKind kinds[] = {LossKind::kSosl, LossKind::kMse};
    const auto rows = experiment_loss_comparison(base, kinds, split);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].loss == LossKind::kMse);
    CHECK(rows[0].density.size() == split.train.size());
  }
  SUBCASE("epsilon sweep skips invalid thresholds") {
    const double eps[] = {0.5};
    const std::vector<std::vector<double>> grid = {{0.5, 0.2}, {0.1, 0.6}};
    const auto rows = experiment_epsilon_sweep(base, eps, grid, split);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].best_thresholds == std::vector<double>{0.1, 0.6});
    REQUIRE(rows[0].notes.size() == 1);
    CHECK(rows[0].notes[0].find("skipped") != std::string::npos);
    CHECK(rows[0].max_similarity_grad_norm <= 2.0 / 0.5);

    const std::vector<std::vector<double>> bad = {{0.9, 0.1}};
    const auto none = experiment_epsilon_sweep(base, eps, bad, split);
    CHECK(none[0].notes.back() == "no valid thresholds in grid");
    CHECK(default_theta_grid().size() == 39);
  }
  SUBCASE("negative sweep flags the degenerate count") {
    const int counts[] = {0, 4};
    const auto rows = experiment_negative_sweep(base, small_synthetic(), counts);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].degenerate);
    CHECK(!rows[1].degenerate);
    std::ostringstream out;
    write_negative_sweep_tsv(rows, out);
    CHECK(out.str().rfind("nr_per_query\t", 0) == 0);
  }
  SUBCASE("generalization gap with no updates") {
    TrainConfig c = base;
    c.optimizer = OptimizerRule::kSgdDecay;
    c.sgd_c = 0.0;
    c.max_steps = 10;
    const int sizes[] = {30};
    const std::uint64_t seeds[] = {1, 2, 3};
    const auto gap = experiment_generalization_gap(c, small_synthetic(), sizes, seeds);
    REQUIRE(gap.runs.size() == 3);
    REQUIRE(gap.summary.size() == 1);
    for (const auto& r : gap.runs) {
      CHECK(r.gap == doctest::Approx(r.heldout_loss - r.train_loss));
    }
    CHECK(gap.summary[0].median_abs_gap >= 0.0);
    CHECK_THROWS_AS(experiment_generalization_gap(c, small_synthetic(), sizes, {}),
                    InvalidArgument);
  }
}
