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

#ifndef XLIR_CORPUS_H_
#define XLIR_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "xlir/kv_config.h"

namespace xlir {

using TokenId = std::int32_t;

// Ordinal relevance labels for the three-class setup.
inline constexpr int kIrrelevant = 1;         // NR
inline constexpr int kPartiallyRelevant = 2;  // SR
inline constexpr int kRelevant = 3;           // MR
inline constexpr int kDefaultNumClasses = 3;

// Token vocabulary for one language. Ids are dense; id 0 is the shared OOV
// token "<unk>" and its embedding row trains like any other.
class Vocabulary {
 public:
  static constexpr TokenId kOovId = 0;
  static constexpr const char* kOovToken = "<unk>";

  explicit Vocabulary(std::string language_tag = "");

  // Builds a vocabulary from the token list; entry 0 must be "<unk>".
  static Vocabulary from_tokens(std::string language_tag,
                                std::vector<std::string> tokens);

  // Returns the existing id when the token is already present.
  TokenId add(const std::string& token);
  // Unknown tokens map to kOovId.
  TokenId id(const std::string& token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::string& language_tag() const { return language_tag_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Whitespace tokenization followed by lookup.
  std::vector<TokenId> encode_text(const std::string& text) const;

 private:
  std::string language_tag_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

struct QueryRecord {
  std::string id;
  std::vector<TokenId> tokens;  // language A
  std::size_t length() const { return tokens.size(); }
};

struct DocumentRecord {
  std::string id;
  std::vector<TokenId> tokens;  // language B
  std::size_t length() const { return tokens.size(); }
};

struct LabeledTriple {
  std::string query_id;
  std::string doc_id;
  int label = kIrrelevant;

  friend bool operator==(const LabeledTriple&, const LabeledTriple&) = default;
};

// Queries, documents, and their labeled pairs, plus id lookup.
class Corpus {
 public:
  Corpus() = default;
  Corpus(Vocabulary vocab_a, Vocabulary vocab_b,
         std::vector<QueryRecord> queries, std::vector<DocumentRecord> docs,
         std::vector<LabeledTriple> triples, int num_classes = kDefaultNumClasses);

  const Vocabulary& vocab_a() const { return vocab_a_; }
  const Vocabulary& vocab_b() const { return vocab_b_; }
  const std::vector<QueryRecord>& queries() const { return queries_; }
  const std::vector<DocumentRecord>& docs() const { return docs_; }
  const std::vector<LabeledTriple>& triples() const { return triples_; }
  int num_classes() const { return num_classes_; }

  const QueryRecord& query(const std::string& id) const;
  const DocumentRecord& doc(const std::string& id) const;
  bool has_query(const std::string& id) const { return query_pos_.contains(id); }
  bool has_doc(const std::string& id) const { return doc_pos_.contains(id); }

  // Query ids with more than one MR document. Loading tolerates these;
  // metrics use the first MR entry in rank order.
  const std::vector<std::string>& multi_relevant_queries() const {
    return multi_relevant_;
  }

  // FNV-1a over the canonical serialization.
  std::uint64_t fingerprint() const;

 private:
  void validate_and_index();

  Vocabulary vocab_a_{"a"};
  Vocabulary vocab_b_{"b"};
  std::vector<QueryRecord> queries_;
  std::vector<DocumentRecord> docs_;
  std::vector<LabeledTriple> triples_;
  int num_classes_ = kDefaultNumClasses;
  std::unordered_map<std::string, std::size_t> query_pos_;
  std::unordered_map<std::string, std::size_t> doc_pos_;
  std::vector<std::string> multi_relevant_;
};

struct SplitRatio {
  int train = 3;
  int validation = 1;
  int test = 1;
};

// Query-disjoint train/validation/test partition of a corpus.
struct CorpusSplit {
  Corpus corpus;
  SplitRatio ratio;
  std::uint64_t seed = 0;
  std::vector<std::string> train_queries;
  std::vector<std::string> validation_queries;
  std::vector<std::string> test_queries;
  std::vector<LabeledTriple> train;
  std::vector<LabeledTriple> validation;
  std::vector<LabeledTriple> test;
};

// Shuffles query ids with `seed` and partitions them by `ratio`.
CorpusSplit split_corpus(Corpus corpus, SplitRatio ratio, std::uint64_t seed);

// Reads vocab_a.txt, vocab_b.txt, queries.jsonl, docs.jsonl, triples.tsv.
Corpus load_corpus(const std::filesystem::path& dir);
// As above, but with caller-supplied vocabularies; the vocab files in `dir`
// are not read.
Corpus load_corpus(const std::filesystem::path& dir, Vocabulary vocab_a,
                   Vocabulary vocab_b);
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// Corpus files plus split.tsv (query_id TAB train|validation|test) and a
// manifest.json carrying the seed.
void write_split(const CorpusSplit& split, const std::filesystem::path& dir);
// Without split.tsv the queries are partitioned 3:1:1 with seed 0.
CorpusSplit load_split(const std::filesystem::path& dir);

struct SyntheticConfig {
  int vocab_size_a = 1000;
  int vocab_size_b = 1000;
  int n_queries = 500;
  int nr_per_query = 40;
  double sr_mean = 3.0;
  std::pair<int, int> query_len_range{5, 15};
  std::pair<int, int> doc_len_range{10, 30};
  double sr_overlap_frac = 0.3;
  // Token frequencies follow id^-exponent (0 is uniform), for query tokens
  // and for document noise respectively.
  double zipf_exponent = 1.0;
  double noise_zipf_exponent = 1.0;
  std::uint64_t seed = 0;

  static SyntheticConfig from_key_values(const KeyValues& kv);
  KeyValues to_key_values() const;
  void validate() const;
};

// Planted bilingual corpus: a random injective token map A -> B, one MR doc
// per query holding every mapped query token plus noise, SR docs holding a
// sr_overlap_frac share of mapped tokens, and NR docs sampled from a pool of
// independently drawn documents. Deterministic in `seed`.
CorpusSplit generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

// k distinct documents not in `exclude`, labeled NR, in sampled order.
std::vector<LabeledTriple> negative_sample(
    const QueryRecord& query, std::span<const DocumentRecord> all_docs,
    std::size_t k, std::uint64_t seed,
    const std::unordered_set<std::string>& exclude);

}  // namespace xlir

#endif  // XLIR_CORPUS_H_
