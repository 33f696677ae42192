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

#include "xlir/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "xlir/error.h"
#include "xlir/rng.h"

namespace xlir {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// TrainConfig

namespace {

constexpr const char* kTrainKeys[] = {
    "loss",       "epsilon",   "theta",      "po_scale",       "optimizer",
    "lr",         "beta1",     "beta2",      "adam_eps",       "sgd_c",
    "batch_size", "epochs",    "max_steps",  "shuffle",        "seed",
    "dim",        "init_scale", "eval_every", "clip",          "force_nonsmooth"};

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (double v : values) out += (out.empty() ? "" : ",") + format_double(v);
  return out;
}

}  // namespace

std::span<const char* const> train_config_keys() { return kTrainKeys; }

TrainConfig TrainConfig::from_key_values(const KeyValues& kv) {
  TrainConfig c;
  c.loss = parse_loss_kind(kv.get_string("loss", to_string(c.loss)));
  c.epsilon = kv.get_double("epsilon", c.epsilon);
  c.thresholds = ThresholdVector(kv.get_doubles("theta", c.thresholds.inner()));
  c.loss_options.po_scale = kv.get_double("po_scale", c.loss_options.po_scale);
  c.optimizer = parse_optimizer_rule(kv.get_string("optimizer", to_string(c.optimizer)));
  c.adam.lr = kv.get_double("lr", c.adam.lr);
  c.adam.beta1 = kv.get_double("beta1", c.adam.beta1);
  c.adam.beta2 = kv.get_double("beta2", c.adam.beta2);
  c.adam.eps = kv.get_double("adam_eps", c.adam.eps);
  c.sgd_c = kv.get_double("sgd_c", c.sgd_c);
  c.batch_size = static_cast<int>(kv.get_int("batch_size", c.batch_size));
  c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
  if (kv.has("max_steps")) c.max_steps = kv.get_int("max_steps", 0);
  c.shuffle = kv.get_bool("shuffle", c.shuffle);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
  c.dim = static_cast<std::size_t>(kv.get_int("dim", static_cast<long long>(c.dim)));
  c.init_scale = kv.get_double("init_scale", c.init_scale);
  c.eval_every = static_cast<int>(kv.get_int("eval_every", c.eval_every));
  if (kv.has("clip")) c.clip = kv.get_double("clip", 0.0);
  c.force_nonsmooth = kv.get_bool("force_nonsmooth", c.force_nonsmooth);
  c.validate();
  return c;
}

KeyValues TrainConfig::to_key_values() const {
  KeyValues kv;
  kv.set("loss", to_string(loss));
  kv.set("epsilon", format_double(epsilon));
  kv.set("theta", join_doubles(thresholds.inner()));
  kv.set("po_scale", format_double(loss_options.po_scale));
  kv.set("optimizer", to_string(optimizer));
  kv.set("lr", format_double(adam.lr));
  kv.set("beta1", format_double(adam.beta1));
  kv.set("beta2", format_double(adam.beta2));
  kv.set("adam_eps", format_double(adam.eps));
  kv.set("sgd_c", format_double(sgd_c));
  kv.set("batch_size", std::to_string(batch_size));
  kv.set("epochs", std::to_string(epochs));
  if (max_steps) kv.set("max_steps", std::to_string(*max_steps));
  kv.set("shuffle", shuffle ? "true" : "false");
  kv.set("seed", std::to_string(seed));
  kv.set("dim", std::to_string(dim));
  kv.set("init_scale", format_double(effective_init_scale()));
  kv.set("eval_every", std::to_string(eval_every));
  if (clip) kv.set("clip", format_double(*clip));
  kv.set("force_nonsmooth", force_nonsmooth ? "true" : "false");
  return kv;
}

void TrainConfig::validate() const {
  SimilarityConfig{epsilon, force_nonsmooth}.validate();
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (max_steps && *max_steps < 0) throw InvalidArgument("max_steps must be >= 0");
  if (dim < 1) throw InvalidArgument("dim must be >= 1");
  if (init_scale < 0.0) throw InvalidArgument("init_scale must be >= 0");
  if (eval_every < 0) throw InvalidArgument("eval_every must be >= 0");
  if (clip && !(*clip > 0.0)) throw InvalidArgument("clip must be positive");
  if (!(loss_options.po_scale > 0.0)) throw InvalidArgument("po_scale must be positive");
  if (optimizer == OptimizerRule::kSgdDecay && !(sgd_c >= 0.0)) {
    throw InvalidArgument("sgd_c must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// Manifest

std::string RunManifest::str() const {
  std::string out;
  for (const auto& line : lines_) out += line + "\n";
  return out;
}

void RunManifest::write(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << str();
}

namespace {

ojson report_json(const MetricReport& r) {
  ojson j;
  for (std::size_t m = 0; m < kNumMetrics; ++m) j[kMetricNames[m]] = r.values[m];
  return j;
}

ojson config_json(const TrainConfig& config, const Corpus& corpus) {
  ojson j;
  j["type"] = "config";
  const KeyValues kv = config.to_key_values();
  for (const auto& [k, v] : kv.entries()) j["config"][k] = v;
  j["seed"] = config.seed;
  std::ostringstream fp;
  fp << std::hex << corpus.fingerprint();
  j["corpus_fingerprint"] = fp.str();
  return j;
}

ojson epoch_json(const EpochRecord& e) {
  ojson j;
  j["type"] = "epoch";
  j["epoch"] = e.epoch;
  j["step"] = e.step;
  j["train_loss"] = e.train_loss;
  if (e.validation_loss) j["validation_loss"] = *e.validation_loss;
  if (e.validation) j["validation"] = report_json(*e.validation);
  j["max_similarity_grad_norm"] = e.max_similarity_grad_norm;
  j["max_packet_norm"] = e.max_packet_norm;
  j["clipped_steps"] = e.clipped_steps;
  return j;
}

void check_tables(const ModelParams& params, const Corpus& corpus) {
  if (params.query.vocab_size() != corpus.vocab_a().size() ||
      params.doc.vocab_size() != corpus.vocab_b().size() ||
      params.query.dim() != params.doc.dim()) {
    throw InvalidArgument(
        "checkpoint/vocabulary mismatch: tables have " +
        std::to_string(params.query.vocab_size()) + "/" +
        std::to_string(params.doc.vocab_size()) + " rows, vocabularies " +
        std::to_string(corpus.vocab_a().size()) + "/" +
        std::to_string(corpus.vocab_b().size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Forward / backward

std::vector<ScoredPair> resolve_pairs(const Corpus& corpus,
                                      std::span<const LabeledTriple> triples) {
  std::vector<ScoredPair> pairs;
  pairs.reserve(triples.size());
  for (const auto& t : triples) {
    pairs.push_back({&corpus.query(t.query_id), &corpus.doc(t.doc_id), t.label});
  }
  return pairs;
}

ModelParams init_model(const Corpus& corpus, const TrainConfig& config) {
  const double scale = config.effective_init_scale();
  return ModelParams{
      init_embeddings(corpus.vocab_a().size(), config.dim, mix_seed(config.seed, 11),
                      scale, corpus.vocab_a().language_tag()),
      init_embeddings(corpus.vocab_b().size(), config.dim, mix_seed(config.seed, 12),
                      scale, corpus.vocab_b().language_tag())};
}

BatchGradient batch_loss_and_gradient(const ModelParams& params,
                                      std::span<const ScoredPair> batch,
                                      const TrainConfig& config) {
  BatchGradient out;
  out.packet = GradientPacket(params.query.dim());
  if (batch.empty()) return out;
  const SimilarityConfig sim_cfg = config.similarity();
  const double eps = config.epsilon;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double loss_sum = 0.0;
  for (const auto& pair : batch) {
    const EncodedVector vq = encode(params.query, pair.query->tokens);
    const EncodedVector vd = encode(params.doc, pair.doc->tokens);
    const SimilarityResult sim = smooth_cosine(vq, vd, sim_cfg);
    out.max_similarity_grad_norm =
        std::max({out.max_similarity_grad_norm, sim.grad_norm_q, sim.grad_norm_d});
    if (eps > 0.0) {
      const double bound_q = 2.0 / (sim.norm_q + eps);
      const double bound_d = 2.0 / (sim.norm_d + eps);
      if (sim.grad_norm_q > bound_q + 1e-9 || sim.grad_norm_d > bound_d + 1e-9) {
        throw NumericError("similarity gradient bound violated for query '" +
                           pair.query->id + "', doc '" + pair.doc->id + "'");
      }
    }
    const LossValue lv =
        evaluate_loss(config.loss, sim.score, pair.label, config.thresholds,
                      config.loss_options);
    if (!std::isfinite(lv.value) || !std::isfinite(lv.dvalue_dr)) {
      throw NumericError("non-finite loss for query '" + pair.query->id + "', doc '" +
                         pair.doc->id + "': r=" + format_double(sim.score) +
                         " |v_q|=" + format_double(sim.norm_q) +
                         " |v_d|=" + format_double(sim.norm_d));
    }
    out.po_underflows += lv.underflow ? 1 : 0;
    loss_sum += lv.value;
    const double coeff = lv.dvalue_dr * inv_batch;
    encode_backward_into(out.packet, TableId::kQuery, pair.query->tokens, vq,
                         sim.grad_q, coeff);
    encode_backward_into(out.packet, TableId::kDocument, pair.doc->tokens, vd,
                         sim.grad_d, coeff);
  }
  out.mean_loss = loss_sum * inv_batch;
  return out;
}

double mean_loss(const ModelParams& params, const Corpus& corpus,
                 std::span<const LabeledTriple> triples, const TrainConfig& config) {
  if (triples.empty()) return 0.0;
  const SimilarityConfig sim_cfg = config.similarity();
  double sum = 0.0;
  for (const auto& t : triples) {
    const auto vq = encode(params.query, corpus.query(t.query_id).tokens);
    const auto vd = encode(params.doc, corpus.doc(t.doc_id).tokens);
    const double r = smooth_cosine_score(vq.values, vd.values, sim_cfg.epsilon);
    sum += evaluate_loss(config.loss, r, t.label, config.thresholds,
                         config.loss_options)
               .value;
  }
  return sum / static_cast<double>(triples.size());
}

EvalResult evaluate(const ModelParams& params, const Corpus& corpus,
                    std::span<const LabeledTriple> triples,
                    const SimilarityConfig& similarity) {
  if (triples.empty()) throw InvalidArgument("evaluate: empty split");
  check_tables(params, corpus);

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<RankedEntry>> grouped;
  for (const auto& t : triples) {
    auto [it, inserted] = grouped.try_emplace(t.query_id);
    if (inserted) order.push_back(t.query_id);
    it->second.push_back({t.doc_id, 0.0, t.label});
  }

  EvalResult result;
  result.per_query.reserve(order.size());
  for (const auto& qid : order) {
    const auto vq = encode(params.query, corpus.query(qid).tokens);
    auto& entries = grouped[qid];
    for (auto& e : entries) {
      const auto vd = encode(params.doc, corpus.doc(e.doc_id).tokens);
      e.score = smooth_cosine_score(vq.values, vd.values, similarity.epsilon);
    }
    result.per_query.push_back(
        query_metrics(rank(qid, std::move(entries), corpus.num_classes())));
  }
  result.report = aggregate(result.per_query);
  return result;
}

std::vector<DensitySample> export_score_density(const ModelParams& params,
                                                const Corpus& corpus,
                                                std::span<const LabeledTriple> triples,
                                                const SimilarityConfig& similarity) {
  std::vector<DensitySample> out;
  out.reserve(triples.size());
  if (triples.empty()) return out;
  check_tables(params, corpus);
  for (const auto& t : triples) {
    const auto vq = encode(params.query, corpus.query(t.query_id).tokens);
    const auto vd = encode(params.doc, corpus.doc(t.doc_id).tokens);
    out.push_back({t.label, smooth_cosine_score(vq.values, vd.values, similarity.epsilon)});
  }
  return out;
}

DensitySummary summarize_density(std::span<const DensitySample> samples,
                                 const ThresholdVector& thresholds) {
  const int k = thresholds.num_classes();
  DensitySummary s;
  s.class_mean.assign(k, 0.0);
  s.class_count.assign(k, 0);
  std::size_t inside = 0;
  for (const auto& d : samples) {
    if (d.label < 1 || d.label > k) continue;
    s.class_mean[d.label - 1] += d.score;
    ++s.class_count[d.label - 1];
    if (d.score >= thresholds.lower(d.label) && d.score <= thresholds.upper(d.label)) {
      ++inside;
    }
  }
  for (int y = 0; y < k; ++y) {
    if (s.class_count[y]) s.class_mean[y] /= static_cast<double>(s.class_count[y]);
  }
  s.fraction_in_segment =
      samples.empty() ? 0.0
                      : static_cast<double>(inside) / static_cast<double>(samples.size());
  return s;
}

void write_density_tsv(std::span<const DensitySample> samples, std::ostream& out) {
  out << "y\tr\n";
  for (const auto& d : samples) out << d.label << '\t' << format_double(d.score) << '\n';
}

// ---------------------------------------------------------------------------
// Training loop

TrainResult train(const TrainConfig& config, const CorpusSplit& split,
                  const TrainOptions& options) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const Corpus& corpus = split.corpus;
  if (split.train.empty()) throw InvalidArgument("train: empty training split");
  if (config.thresholds.num_classes() != corpus.num_classes()) {
    throw InvalidArgument("train: thresholds define " +
                          std::to_string(config.thresholds.num_classes()) +
                          " classes, corpus has " +
                          std::to_string(corpus.num_classes()));
  }
  const SimilarityConfig sim_cfg = config.similarity();

  TrainResult result;
  ModelParams params = init_model(corpus, config);
  OptimizerState state = config.optimizer == OptimizerRule::kAdam
                             ? OptimizerState::adam(config.adam, params)
                             : OptimizerState::sgd_ct(config.sgd_c);
  const std::vector<ScoredPair> pairs = resolve_pairs(corpus, split.train);
  const bool have_validation = !split.validation.empty() && config.eval_every > 0;
  // Runtime ceiling on the batch packet norm: Lipschitz constant of the loss
  // (4) times the similarity bound (2 / eps) times the batch size.
  const double ceiling = config.epsilon > 0.0
                             ? 4.0 * (2.0 / config.epsilon) * config.batch_size
                             : std::numeric_limits<double>::infinity();

  result.manifest.append(config_json(config, corpus).dump());

  double best_ndcg = -1.0;
  auto record_epoch = [&](EpochRecord rec, bool evaluate_now) {
    if (have_validation && evaluate_now) {
      rec.validation_loss = mean_loss(params, corpus, split.validation, config);
      rec.validation = evaluate(params, corpus, split.validation, sim_cfg).report;
      const double ndcg = rec.validation->get(Metric::kNdcgAt5);
      if (ndcg > best_ndcg) {
        best_ndcg = ndcg;
        result.best_epoch = rec.epoch;
        result.best_checkpoint = {params, config.seed, rec.step};
      }
    }
    result.manifest.append(epoch_json(rec).dump());
    result.history.push_back(std::move(rec));
  };

  EpochRecord initial;
  initial.train_loss = mean_loss(params, corpus, split.train, config);
  record_epoch(initial, true);
  if (!have_validation) result.best_checkpoint = {params, config.seed, 0};

  if (options.telemetry) {
    *options.telemetry << "step\tmean_loss\tgrad_norm\tmax_row_norm\tclipped\n";
  }

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<ScoredPair> batch;
  batch.reserve(batch_size);
  std::int64_t step = 0;
  const auto done = [&](int epoch) {
    if (config.max_steps) return step >= *config.max_steps;
    return epoch > config.epochs;
  };

  for (int epoch = 1; !done(epoch); ++epoch) {
    if (config.shuffle) {
      Rng rng(mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
      rng.shuffle(std::span<std::size_t>(order));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      if (config.max_steps && step >= *config.max_steps) break;
      batch.clear();
      const std::size_t end = std::min(order.size(), begin + batch_size);
      for (std::size_t i = begin; i < end; ++i) batch.push_back(pairs[order[i]]);

      BatchGradient bg = batch_loss_and_gradient(params, batch, config);
      const double norm = bg.packet.global_norm();
      if (norm > ceiling) {
        throw NumericError("step " + std::to_string(step + 1) + ": gradient norm " +
                           format_double(norm) + " exceeds runtime ceiling " +
                           format_double(ceiling));
      }
      bool clipped = false;
      if (config.clip) clipped = clip_in_place(bg.packet, *config.clip);
      bg.packet.set_step_id(step + 1);
      apply_update(state, params, bg.packet);
      ++step;

      loss_sum += bg.mean_loss * static_cast<double>(batch.size());
      loss_count += batch.size();
      rec.max_similarity_grad_norm =
          std::max(rec.max_similarity_grad_norm, bg.max_similarity_grad_norm);
      rec.max_packet_norm = std::max(rec.max_packet_norm, norm);
      rec.clipped_steps += clipped ? 1 : 0;
      if (options.telemetry) {
        *options.telemetry << step << '\t' << format_double(bg.mean_loss) << '\t'
                           << format_double(norm) << '\t'
                           << format_double(bg.packet.max_row_norm()) << '\t'
                           << (clipped ? 1 : 0) << '\n';
      }
    }
    rec.step = step;
    rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    result.max_similarity_grad_norm =
        std::max(result.max_similarity_grad_norm, rec.max_similarity_grad_norm);
    const bool evaluate_now = config.eval_every > 0 && epoch % config.eval_every == 0;
    record_epoch(std::move(rec), evaluate_now);
  }

  result.final_checkpoint = {params, config.seed, step};
  ojson final_line;
  final_line["type"] = "final";
  final_line["step"] = step;
  final_line["best_epoch"] = result.best_epoch;
  if (best_ndcg >= 0.0) final_line["best_validation_ndcg5"] = best_ndcg;
  if (options.evaluate_test && !split.test.empty()) {
    result.test = evaluate(params, corpus, split.test, sim_cfg).report;
    final_line["test"] = report_json(*result.test);
  }
  result.manifest.append(final_line.dump());
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (options.out_dir) {
    const fs::path& dir = *options.out_dir;
    fs::create_directories(dir);
    result.manifest.write(dir / "manifest.jsonl");
    save_checkpoint(result.final_checkpoint, dir / "checkpoint_final.txt");
    save_checkpoint(result.best_checkpoint, dir / "checkpoint_best.txt");
    std::ofstream timing(dir / "timing.json", std::ios::trunc);
    timing << ojson{{"wall_seconds", result.wall_seconds}, {"steps", step}}.dump() << "\n";
  }
  return result;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

void write_report_columns(const MetricReport& r, std::ostream& out) {
  for (std::size_t m = 0; m < kNumMetrics; ++m) out << '\t' << format_double(r.values[m]);
}

void write_report_header(std::ostream& out) {
  for (const char* name : kMetricNames) out << '\t' << name;
}

}  // namespace

std::vector<LossComparisonRow> experiment_loss_comparison(
    std::span<const TrainConfig> runs, const CorpusSplit& split) {
  if (runs.empty()) throw InvalidArgument("loss comparison: no runs");
  for (const auto& r : runs) {
    if (r.seed != runs.front().seed) {
      throw InvalidArgument("loss comparison: all runs must share one seed (" +
                            std::to_string(runs.front().seed) + " vs " +
                            std::to_string(r.seed) + ")");
    }
  }
  std::vector<LossComparisonRow> rows;
  for (const auto& config : runs) {
    TrainResult tr = train(config, split);
    LossComparisonRow row;
    row.loss = config.loss;
    row.test = tr.test.value_or(MetricReport{});
    row.density = export_score_density(tr.final_checkpoint.params, split.corpus,
                                       split.train, config.similarity());
    row.train_density = summarize_density(row.density, config.thresholds);
    row.final_train_loss = tr.history.back().train_loss;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LossComparisonRow> experiment_loss_comparison(
    const TrainConfig& base, std::span<const LossKind> losses,
    const CorpusSplit& split) {
  std::vector<TrainConfig> runs;
  for (LossKind kind : losses) {
    TrainConfig c = base;
    c.loss = kind;
    runs.push_back(c);
  }
  return experiment_loss_comparison(runs, split);
}

void write_loss_comparison_tsv(std::span<const LossComparisonRow> rows,
                               std::ostream& out) {
  out << "loss";
  write_report_header(out);
  out << "\tfinal_train_loss\tfraction_in_segment\n";
  for (const auto& row : rows) {
    out << to_string(row.loss);
    write_report_columns(row.test, out);
    out << '\t' << format_double(row.final_train_loss) << '\t'
        << format_double(row.train_density.fraction_in_segment) << '\n';
  }
}

std::vector<std::vector<double>> default_theta_grid() {
  std::vector<std::vector<double>> grid;
  for (int a = 0; a <= 5; ++a) {
    for (int b = a + 1; b <= 9; ++b) grid.push_back({a / 10.0, b / 10.0});
  }
  return grid;
}

std::vector<EpsilonSweepRow> experiment_epsilon_sweep(
    const TrainConfig& base, std::span<const double> epsilons,
    std::span<const std::vector<double>> theta_grid, const CorpusSplit& split) {
  if (split.validation.empty() || split.test.empty()) {
    throw InvalidArgument("epsilon sweep needs validation and test splits");
  }
  std::vector<EpsilonSweepRow> rows;
  for (double eps : epsilons) {
    EpsilonSweepRow row;
    row.epsilon = eps;
    row.validation_ndcg = -1.0;
    std::optional<ModelParams> best;
    TrainConfig best_config;
    for (const auto& theta : theta_grid) {
      if (!ThresholdVector::valid(theta) ||
          static_cast<int>(theta.size()) + 1 != split.corpus.num_classes()) {
        row.notes.push_back("skipped invalid thresholds (" + join_doubles(theta) + ")");
        continue;
      }
      TrainConfig c = base;
      c.epsilon = eps;
      c.force_nonsmooth = eps == 0.0;
      c.thresholds = ThresholdVector(theta);
      TrainResult tr = train(c, split, TrainOptions{std::nullopt, nullptr, false});
      row.max_similarity_grad_norm =
          std::max(row.max_similarity_grad_norm, tr.max_similarity_grad_norm);
      const double ndcg = evaluate(tr.final_checkpoint.params, split.corpus,
                                   split.validation, c.similarity())
                              .report.get(Metric::kNdcgAt5);
      if (ndcg > row.validation_ndcg) {
        row.validation_ndcg = ndcg;
        row.best_thresholds = theta;
        best = std::move(tr.final_checkpoint.params);
        best_config = c;
      }
    }
    if (best) {
      row.test = evaluate(*best, split.corpus, split.test, best_config.similarity()).report;
    } else {
      row.notes.push_back("no valid thresholds in grid");
      row.validation_ndcg = 0.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_epsilon_sweep_tsv(std::span<const EpsilonSweepRow> rows, std::ostream& out) {
  out << "epsilon\ttheta\tvalidation_NDCG@5";
  write_report_header(out);
  out << "\tmax_similarity_grad_norm\tnotes\n";
  for (const auto& row : rows) {
    out << format_double(row.epsilon) << '\t' << join_doubles(row.best_thresholds) << '\t'
        << format_double(row.validation_ndcg);
    write_report_columns(row.test, out);
    out << '\t' << format_double(row.max_similarity_grad_norm) << '\t';
    for (std::size_t i = 0; i < row.notes.size(); ++i) {
      out << (i ? "; " : "") << row.notes[i];
    }
    out << '\n';
  }
}

std::vector<NegativeSweepRow> experiment_negative_sweep(
    const TrainConfig& base, const SyntheticConfig& corpus_config,
    std::span<const int> nr_counts) {
  std::vector<NegativeSweepRow> rows;
  for (int count : nr_counts) {
    SyntheticConfig cc = corpus_config;
    cc.nr_per_query = count;
    const CorpusSplit split = generate_synthetic(cc, cc.seed);
    TrainResult tr = train(base, split);
    NegativeSweepRow row;
    row.nr_per_query = count;
    row.degenerate = count == 0;
    row.test = tr.test.value_or(MetricReport{});
    rows.push_back(row);
  }
  return rows;
}

void write_negative_sweep_tsv(std::span<const NegativeSweepRow> rows,
                              std::ostream& out) {
  out << "nr_per_query";
  write_report_header(out);
  out << "\tdegenerate\n";
  for (const auto& row : rows) {
    out << row.nr_per_query;
    write_report_columns(row.test, out);
    out << '\t' << (row.degenerate ? 1 : 0) << '\n';
  }
}

GapResult experiment_generalization_gap(const TrainConfig& base,
                                        const SyntheticConfig& corpus_config,
                                        std::span<const int> sample_sizes,
                                        std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw InvalidArgument("generalization gap: no seeds");
  GapResult result;
  for (int n : sample_sizes) {
    std::vector<double> abs_gaps;
    for (std::uint64_t seed : seeds) {
      SyntheticConfig cc = corpus_config;
      cc.n_queries = n;
      const CorpusSplit split = generate_synthetic(cc, seed);
      TrainConfig c = base;
      c.seed = seed;
      c.eval_every = 0;
      TrainResult tr = train(c, split, TrainOptions{std::nullopt, nullptr, false});
      std::vector<LabeledTriple> heldout = split.validation;
      heldout.insert(heldout.end(), split.test.begin(), split.test.end());
      GapRow row;
      row.n_queries = n;
      row.seed = seed;
      row.train_loss = mean_loss(tr.final_checkpoint.params, split.corpus, split.train, c);
      row.heldout_loss = mean_loss(tr.final_checkpoint.params, split.corpus, heldout, c);
      row.gap = row.heldout_loss - row.train_loss;
      abs_gaps.push_back(std::abs(row.gap));
      result.runs.push_back(row);
    }
    std::sort(abs_gaps.begin(), abs_gaps.end());
    const std::size_t mid = abs_gaps.size() / 2;
    const double median = abs_gaps.size() % 2
                              ? abs_gaps[mid]
                              : 0.5 * (abs_gaps[mid - 1] + abs_gaps[mid]);
    result.summary.push_back({n, median});
  }
  return result;
}

void write_gap_tsv(const GapResult& result, std::ostream& out) {
  out << "n_queries\tseed\ttrain_loss\theldout_loss\tgap\n";
  for (const auto& r : result.runs) {
    out << r.n_queries << '\t' << r.seed << '\t' << format_double(r.train_loss) << '\t'
        << format_double(r.heldout_loss) << '\t' << format_double(r.gap) << '\n';
  }
}

}  // namespace xlir
