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

#ifndef XLIR_TRAINER_H_
#define XLIR_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xlir/corpus.h"
#include "xlir/encoder.h"
#include "xlir/kv_config.h"
#include "xlir/loss.h"
#include "xlir/metrics.h"
#include "xlir/optim.h"
#include "xlir/similarity.h"

namespace xlir {

struct TrainConfig {
  LossKind loss = LossKind::kSosl;
  double epsilon = 1.0;
  ThresholdVector thresholds{{0.2, 0.7}};
  LossOptions loss_options;

  OptimizerRule optimizer = OptimizerRule::kAdam;
  AdamConfig adam;
  double sgd_c = 1.0;

  int batch_size = 128;
  int epochs = 30;
  // When set, training runs exactly this many steps (0 means no updates) and
  // `epochs` is ignored.
  std::optional<std::int64_t> max_steps;
  bool shuffle = true;
  std::uint64_t seed = 0;

  std::size_t dim = kDefaultEmbeddingDim;
  double init_scale = 0.0;  // 0 selects 0.5 / dim
  int eval_every = 1;       // epochs between validation passes; 0 disables
  std::optional<double> clip;
  // Permits epsilon = 0 (plain cosine) inside the optimizer loop.
  bool force_nonsmooth = false;

  static TrainConfig from_key_values(const KeyValues& kv);
  KeyValues to_key_values() const;
  void validate() const;

  double effective_init_scale() const {
    return init_scale > 0.0 ? init_scale : default_init_scale(dim);
  }
  SimilarityConfig similarity() const { return {epsilon, force_nonsmooth}; }
};

// Every key TrainConfig::from_key_values understands.
std::span<const char* const> train_config_keys();

struct EpochRecord {
  int epoch = 0;
  std::int64_t step = 0;
  double train_loss = 0.0;  // mean pair loss over the epoch's steps
  std::optional<double> validation_loss;
  std::optional<MetricReport> validation;
  double max_similarity_grad_norm = 0.0;
  double max_packet_norm = 0.0;
  std::int64_t clipped_steps = 0;
};

// Append-only JSON-lines record of a run: a config line, one line per epoch
// (epoch 0 is the untrained model), and a final line.
class RunManifest {
 public:
  void append(std::string json_line) { lines_.push_back(std::move(json_line)); }
  const std::vector<std::string>& lines() const { return lines_; }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> lines_;
};

struct TrainOptions {
  std::optional<std::filesystem::path> out_dir;
  std::ostream* telemetry = nullptr;  // per-step TSV when set
  bool evaluate_test = true;
};

struct TrainResult {
  RunManifest manifest;
  std::vector<EpochRecord> history;
  Checkpoint final_checkpoint;
  Checkpoint best_checkpoint;  // highest validation NDCG@5
  int best_epoch = 0;
  std::optional<MetricReport> test;
  double max_similarity_grad_norm = 0.0;
  double wall_seconds = 0.0;  // not part of the manifest
};

struct ScoredPair {
  const QueryRecord* query = nullptr;
  const DocumentRecord* doc = nullptr;
  int label = kIrrelevant;
};

std::vector<ScoredPair> resolve_pairs(const Corpus& corpus,
                                      std::span<const LabeledTriple> triples);

struct BatchGradient {
  double mean_loss = 0.0;
  GradientPacket packet;
  double max_similarity_grad_norm = 0.0;
  std::size_t po_underflows = 0;
};

// Mean loss over `batch` and its exact gradient through loss, smooth cosine,
// and both encoders. Throws NumericError on a non-finite loss or when a
// similarity gradient exceeds 2 / (|v| + eps).
BatchGradient batch_loss_and_gradient(const ModelParams& params,
                                      std::span<const ScoredPair> batch,
                                      const TrainConfig& config);

ModelParams init_model(const Corpus& corpus, const TrainConfig& config);

TrainResult train(const TrainConfig& config, const CorpusSplit& split,
                  const TrainOptions& options = {});

struct EvalResult {
  MetricReport report;
  std::vector<QueryMetrics> per_query;
};

// Scores every labeled pair of `triples`, ranks per query, aggregates. Throws
// on an empty split or when table sizes disagree with the vocabularies.
EvalResult evaluate(const ModelParams& params, const Corpus& corpus,
                    std::span<const LabeledTriple> triples,
                    const SimilarityConfig& similarity);

double mean_loss(const ModelParams& params, const Corpus& corpus,
                 std::span<const LabeledTriple> triples, const TrainConfig& config);

struct DensitySample {
  int label = 0;
  double score = 0.0;
};

std::vector<DensitySample> export_score_density(const ModelParams& params,
                                                const Corpus& corpus,
                                                std::span<const LabeledTriple> triples,
                                                const SimilarityConfig& similarity);

struct DensitySummary {
  std::vector<double> class_mean;   // index y - 1
  std::vector<std::size_t> class_count;
  double fraction_in_segment = 0.0;  // score within [theta_{y-1}, theta_y]
};

DensitySummary summarize_density(std::span<const DensitySample> samples,
                                 const ThresholdVector& thresholds);

// y TAB r, with a header row.
void write_density_tsv(std::span<const DensitySample> samples, std::ostream& out);

// ---------------------------------------------------------------------------
// Experiment drivers. Each returns rows that are also written as TSV.

struct LossComparisonRow {
  LossKind loss = LossKind::kSosl;
  MetricReport test;
  DensitySummary train_density;
  std::vector<DensitySample> density;  // training split
  double final_train_loss = 0.0;
};

// One model per config on the same corpus. All configs must share a seed.
std::vector<LossComparisonRow> experiment_loss_comparison(
    std::span<const TrainConfig> runs, const CorpusSplit& split);
std::vector<LossComparisonRow> experiment_loss_comparison(
    const TrainConfig& base, std::span<const LossKind> losses,
    const CorpusSplit& split);
void write_loss_comparison_tsv(std::span<const LossComparisonRow> rows,
                               std::ostream& out);

struct EpsilonSweepRow {
  double epsilon = 0.0;
  std::vector<double> best_thresholds;
  double validation_ndcg = 0.0;
  MetricReport test;
  double max_similarity_grad_norm = 0.0;
  std::vector<std::string> notes;
};

// theta_1 in {0.0, ..., 0.5}, theta_2 in {theta_1 + 0.1, ..., 0.9}.
std::vector<std::vector<double>> default_theta_grid();

// Per epsilon, trains at every valid grid point, keeps the best validation
// NDCG@5, and reports test metrics there. epsilon = 0 runs in forced
// non-smooth mode.
std::vector<EpsilonSweepRow> experiment_epsilon_sweep(
    const TrainConfig& base, std::span<const double> epsilons,
    std::span<const std::vector<double>> theta_grid, const CorpusSplit& split);
void write_epsilon_sweep_tsv(std::span<const EpsilonSweepRow> rows, std::ostream& out);

struct NegativeSweepRow {
  int nr_per_query = 0;
  MetricReport test;
  bool degenerate = false;  // no NR documents
};

// Regenerates the synthetic corpus for every count with the same seed.
std::vector<NegativeSweepRow> experiment_negative_sweep(
    const TrainConfig& base, const SyntheticConfig& corpus_config,
    std::span<const int> nr_counts);
void write_negative_sweep_tsv(std::span<const NegativeSweepRow> rows,
                              std::ostream& out);

struct GapRow {
  int n_queries = 0;
  std::uint64_t seed = 0;
  double train_loss = 0.0;
  double heldout_loss = 0.0;
  double gap = 0.0;  // heldout - train
};

struct GapSummaryRow {
  int n_queries = 0;
  double median_abs_gap = 0.0;
};

struct GapResult {
  std::vector<GapRow> runs;
  std::vector<GapSummaryRow> summary;
};

// For each n and seed: generate n queries, train base.max_steps steps
// (typically with sgd_ct), and compare the mean training loss with the mean
// loss on the held-out (validation + test) queries.
GapResult experiment_generalization_gap(const TrainConfig& base,
                                        const SyntheticConfig& corpus_config,
                                        std::span<const int> sample_sizes,
                                        std::span<const std::uint64_t> seeds);
void write_gap_tsv(const GapResult& result, std::ostream& out);

}  // namespace xlir

#endif  // XLIR_TRAINER_H_
