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

// Command-line driver: corpus generation, training, evaluation and the
// experiment sweeps. Every subcommand takes --config, --seed and --out.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xlir/corpus.h"
#include "xlir/encoder.h"
#include "xlir/error.h"
#include "xlir/gradcheck.h"
#include "xlir/kv_config.h"
#include "xlir/loss.h"
#include "xlir/metrics.h"
#include "xlir/similarity.h"
#include "xlir/trainer.h"

namespace fs = std::filesystem;
using namespace xlir;

namespace {

// Keys read by the subcommands themselves, on top of the training and
// generator keys.
const char* const kDriverKeys[] = {
    "losses",     "epsilons",    "theta_grid", "nr_counts", "sample_sizes",
    "gap_seeds",  "points",      "grid_lo",    "grid_hi",   "grid_points",
    "fixed",      "diagnostic",  "instances",  "split"};

const char* const kSyntheticKeys[] = {"vocab_size_a",    "vocab_size_b", "n_queries",
                                      "nr_per_query",    "sr_mean",      "query_len_range",
                                      "doc_len_range",   "sr_overlap_frac", "zipf_exponent",
                                      "noise_zipf_exponent"};

struct Common {
  std::string config_path;
  std::optional<long long> seed;
  std::string out = ".";
};

KeyValues load_config(const Common& c) {
  KeyValues kv;
  if (!c.config_path.empty()) kv = KeyValues::load(c.config_path);
  std::set<std::string> known(std::begin(kDriverKeys), std::end(kDriverKeys));
  known.insert(std::begin(kSyntheticKeys), std::end(kSyntheticKeys));
  for (const char* k : train_config_keys()) known.insert(k);
  for (const auto& [key, value] : kv.entries()) {
    if (!known.contains(key)) {
      throw InvalidArgument("unknown config key '" + key + "' in " + c.config_path);
    }
  }
  if (c.seed) kv.set("seed", std::to_string(*c.seed));
  return kv;
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  return out;
}

std::vector<int> get_ints(const KeyValues& kv, const std::string& key,
                          std::vector<int> fallback) {
  if (!kv.has(key)) return fallback;
  std::vector<int> out;
  for (double v : kv.get_doubles(key, {})) out.push_back(static_cast<int>(v));
  return out;
}

// "a,b;c,d" -> {{a,b},{c,d}}
std::vector<std::vector<double>> get_theta_grid(const KeyValues& kv) {
  if (!kv.has("theta_grid")) return default_theta_grid();
  std::vector<std::vector<double>> grid;
  std::stringstream ss(kv.get_string("theta_grid", ""));
  std::string item;
  while (std::getline(ss, item, ';')) {
    KeyValues one;
    one.set("t", item);
    grid.push_back(one.get_doubles("t", {}));
  }
  return grid;
}

const std::vector<LabeledTriple>& pick_split(const CorpusSplit& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "validation") return s.validation;
  if (name == "test") return s.test;
  throw InvalidArgument("unknown split '" + name + "' (train | validation | test)");
}

CorpusSplit corpus_for(const std::string& corpus_dir, const KeyValues& kv) {
  if (!corpus_dir.empty()) return load_split(corpus_dir);
  const SyntheticConfig sc = SyntheticConfig::from_key_values(kv);
  return generate_synthetic(sc, sc.seed);
}

void print_report(const MetricReport& r) {
  write_metric_report_tsv(r, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xlir: cross-lingual retrieval training and evaluation"};
  app.require_subcommand(1);

  Common common[11];
  std::string corpus_dir, checkpoint_path;
  bool telemetry = false;
  int idx = 0;
  auto add = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    Common& c = common[idx++];
    s->add_option("--config", c.config_path, "key=value configuration file");
    s->add_option("--seed", c.seed, "overrides the seed key");
    s->add_option("--out", c.out, "output directory")->capture_default_str();
    return std::pair{s, &c};
  };

  auto [gen, gen_c] = add("gen", "generate a planted synthetic corpus");
  auto [trn, trn_c] = add("train", "train one model");
  trn->add_option("--corpus", corpus_dir, "corpus directory (synthetic when omitted)");
  trn->add_flag("--telemetry", telemetry, "write per-step telemetry.tsv");
  auto [evl, evl_c] = add("eval", "evaluate a checkpoint");
  evl->add_option("--corpus", corpus_dir)->required();
  evl->add_option("--checkpoint", checkpoint_path)->required();
  auto [sweps, sweps_c] = add("sweep-eps", "epsilon sweep with threshold grid search");
  sweps->add_option("--corpus", corpus_dir);
  auto [swneg, swneg_c] = add("sweep-neg", "NR-count sweep on regenerated corpora");
  auto [cmp, cmp_c] = add("compare-loss", "train one model per loss");
  cmp->add_option("--corpus", corpus_dir);
  auto [gap, gap_c] = add("gen-gap", "generalization gap versus sample size");
  auto [dens, dens_c] = add("density", "per-class score samples of a checkpoint");
  dens->add_option("--corpus", corpus_dir)->required();
  dens->add_option("--checkpoint", checkpoint_path)->required();
  auto [curves, curves_c] = add("loss-curves", "loss value against score per class");
  auto [field, field_c] = add("grad-field", "similarity partial derivative over a grid");
  auto [gc, gc_c] = add("gradcheck", "finite-difference gradient checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const KeyValues kv = load_config(*gen_c);
      const SyntheticConfig sc = SyntheticConfig::from_key_values(kv);
      const CorpusSplit split = generate_synthetic(sc, sc.seed);
      write_split(split, out_dir(*gen_c));
      std::cout << "queries\t" << split.corpus.queries().size() << "\ndocs\t"
                << split.corpus.docs().size() << "\ntriples\t"
                << split.corpus.triples().size() << '\n';
    } else if (trn->parsed()) {
      const KeyValues kv = load_config(*trn_c);
      const TrainConfig config = TrainConfig::from_key_values(kv);
      const CorpusSplit split = corpus_for(corpus_dir, kv);
      const fs::path dir = out_dir(*trn_c);
      std::ofstream tele;
      TrainOptions opts{dir, nullptr, true};
      if (telemetry) {
        tele = open_out(dir / "telemetry.tsv");
        opts.telemetry = &tele;
      }
      const TrainResult tr = train(config, split, opts);
      if (tr.test) {
        auto out = open_out(dir / "test_metrics.tsv");
        write_metric_report_tsv(*tr.test, out);
        print_report(*tr.test);
      }
    } else if (evl->parsed() || dens->parsed()) {
      const Common& c = evl->parsed() ? *evl_c : *dens_c;
      const KeyValues kv = load_config(c);
      const TrainConfig config = TrainConfig::from_key_values(kv);
      const CorpusSplit split = load_split(corpus_dir);
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      const fs::path dir = out_dir(c);
      if (evl->parsed()) {
        const auto& triples = pick_split(split, kv.get_string("split", "test"));
        const EvalResult er =
            evaluate(ckpt.params, split.corpus, triples, config.similarity());
        auto out = open_out(dir / "metrics.tsv");
        write_metric_report_tsv(er.report, out);
        auto detail = open_out(dir / "per_query.jsonl");
        write_query_metrics_jsonl(er.per_query, detail);
        print_report(er.report);
      } else {
        const auto& triples = pick_split(split, kv.get_string("split", "train"));
        const auto samples =
            export_score_density(ckpt.params, split.corpus, triples, config.similarity());
        auto out = open_out(dir / "density.tsv");
        write_density_tsv(samples, out);
        const auto summary = summarize_density(samples, config.thresholds);
        std::cout << "y\tmean_r\tcount\n";
        for (std::size_t y = 0; y < summary.class_mean.size(); ++y) {
          std::cout << y + 1 << '\t' << format_double(summary.class_mean[y]) << '\t'
                    << summary.class_count[y] << '\n';
        }
        std::cout << "fraction_in_segment\t" << format_double(summary.fraction_in_segment)
                  << '\n';
      }
    } else if (sweps->parsed()) {
      const KeyValues kv = load_config(*sweps_c);
      const TrainConfig base = TrainConfig::from_key_values(kv);
      const CorpusSplit split = corpus_for(corpus_dir, kv);
      const auto eps = kv.get_doubles("epsilons", {0.0, 0.25, 0.5, 1.0, 1.5, 2.0});
      const auto grid = get_theta_grid(kv);
      const auto rows = experiment_epsilon_sweep(base, eps, grid, split);
      auto out = open_out(out_dir(*sweps_c) / "epsilon_sweep.tsv");
      write_epsilon_sweep_tsv(rows, out);
      write_epsilon_sweep_tsv(rows, std::cout);
    } else if (swneg->parsed()) {
      const KeyValues kv = load_config(*swneg_c);
      const TrainConfig base = TrainConfig::from_key_values(kv);
      const SyntheticConfig sc = SyntheticConfig::from_key_values(kv);
      const auto counts = get_ints(kv, "nr_counts", {20, 40, 60, 80, 100});
      const auto rows = experiment_negative_sweep(base, sc, counts);
      auto out = open_out(out_dir(*swneg_c) / "negative_sweep.tsv");
      write_negative_sweep_tsv(rows, out);
      write_negative_sweep_tsv(rows, std::cout);
    } else if (cmp->parsed()) {
      const KeyValues kv = load_config(*cmp_c);
      const TrainConfig base = TrainConfig::from_key_values(kv);
      const CorpusSplit split = corpus_for(corpus_dir, kv);
      std::vector<LossKind> losses;
      std::stringstream ss(kv.get_string("losses", "sosl,mse,po"));
      for (std::string name; std::getline(ss, name, ',');) losses.push_back(parse_loss_kind(name));
      const auto rows = experiment_loss_comparison(base, losses, split);
      const fs::path dir = out_dir(*cmp_c);
      auto out = open_out(dir / "loss_comparison.tsv");
      write_loss_comparison_tsv(rows, out);
      for (const auto& row : rows) {
        auto d = open_out(dir / ("density_" + to_string(row.loss) + ".tsv"));
        write_density_tsv(row.density, d);
      }
      write_loss_comparison_tsv(rows, std::cout);
    } else if (gap->parsed()) {
      const KeyValues kv = load_config(*gap_c);
      TrainConfig base = TrainConfig::from_key_values(kv);
      if (!kv.has("optimizer")) base.optimizer = OptimizerRule::kSgdDecay;
      const SyntheticConfig sc = SyntheticConfig::from_key_values(kv);
      const auto sizes = get_ints(kv, "sample_sizes", {250, 500, 1000, 2000});
      std::vector<std::uint64_t> seeds;
      for (int s : get_ints(kv, "gap_seeds", {1, 2, 3, 4, 5})) {
        seeds.push_back(static_cast<std::uint64_t>(s));
      }
      const GapResult result = experiment_generalization_gap(base, sc, sizes, seeds);
      const fs::path dir = out_dir(*gap_c);
      auto runs = open_out(dir / "gap_runs.tsv");
      write_gap_tsv(result, runs);
      auto summary = open_out(dir / "gap_summary.tsv");
      summary << "n_queries\tmedian_abs_gap\n";
      std::cout << "n_queries\tmedian_abs_gap\n";
      for (const auto& row : result.summary) {
        summary << row.n_queries << '\t' << format_double(row.median_abs_gap) << '\n';
        std::cout << row.n_queries << '\t' << format_double(row.median_abs_gap) << '\n';
      }
    } else if (curves->parsed()) {
      const KeyValues kv = load_config(*curves_c);
      const TrainConfig config = TrainConfig::from_key_values(kv);
      const auto rows = loss_curves(config.loss, config.thresholds,
                                    static_cast<int>(kv.get_int("points", 201)),
                                    config.loss_options);
      auto out = open_out(out_dir(*curves_c) / "loss_curves.tsv");
      write_loss_curves_tsv(rows, out);
    } else if (field->parsed()) {
      const KeyValues kv = load_config(*field_c);
      SimilarityConfig cfg{kv.get_double("epsilon", 1.0), kv.get_bool("diagnostic", false)};
      if (cfg.epsilon == 0.0) cfg.diagnostic = true;
      GridSpec grid;
      grid.lo = kv.get_double("grid_lo", grid.lo);
      grid.hi = kv.get_double("grid_hi", grid.hi);
      grid.points = static_cast<int>(kv.get_int("grid_points", grid.points));
      const auto fixed = kv.get_doubles("fixed", {1.0, 0.0});
      const auto points = sweep_gradient_field(cfg, grid, fixed);
      auto out = open_out(out_dir(*field_c) / "grad_field.tsv");
      write_gradient_field_tsv(points, out);
    } else if (gc->parsed()) {
      const KeyValues kv = load_config(*gc_c);
      const auto seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
      const auto checks = run_gradcheck_suite(
          seed, static_cast<std::size_t>(kv.get_int("instances", 100)));
      auto out = open_out(out_dir(*gc_c) / "gradcheck.tsv");
      write_suite_summary(checks, out);
      write_suite_summary(checks, std::cout);
      const bool ok = std::all_of(checks.begin(), checks.end(),
                                  [](const SuiteCheck& c) { return c.passed; });
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
