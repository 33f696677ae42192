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

#include "xlir/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xlir/error.h"
#include "xlir/rng.h"

namespace xlir {
namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::string language_tag)
    : language_tag_(std::move(language_tag)) {
  add(kOovToken);
}

Vocabulary Vocabulary::from_tokens(std::string language_tag,
                                   std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kOovToken) {
    throw InvalidArgument("vocabulary '" + language_tag +
                          "': entry 0 must be " + kOovToken);
  }
  Vocabulary vocab(std::move(language_tag));
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (vocab.token_to_id_.contains(tokens[i])) {
      throw InvalidArgument("vocabulary '" + vocab.language_tag_ +
                            "': duplicate token '" + tokens[i] + "'");
    }
    vocab.add(tokens[i]);
  }
  return vocab;
}

TokenId Vocabulary::add(const std::string& token) {
  auto [it, inserted] =
      token_to_id_.try_emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

TokenId Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kOovId : it->second;
}

std::vector<TokenId> Vocabulary::encode_text(const std::string& text) const {
  std::istringstream in(text);
  std::vector<TokenId> ids;
  std::string tok;
  while (in >> tok) ids.push_back(id(tok));
  return ids;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(Vocabulary vocab_a, Vocabulary vocab_b,
               std::vector<QueryRecord> queries,
               std::vector<DocumentRecord> docs,
               std::vector<LabeledTriple> triples, int num_classes)
    : vocab_a_(std::move(vocab_a)),
      vocab_b_(std::move(vocab_b)),
      queries_(std::move(queries)),
      docs_(std::move(docs)),
      triples_(std::move(triples)),
      num_classes_(num_classes) {
  validate_and_index();
}

void Corpus::validate_and_index() {
  if (num_classes_ < 2) throw InvalidArgument("need at least 2 classes");
  query_pos_.clear();
  doc_pos_.clear();
  multi_relevant_.clear();
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    const auto& q = queries_[i];
    if (!query_pos_.emplace(q.id, i).second) {
      throw InvalidArgument("duplicate query_id '" + q.id + "'");
    }
    if (q.tokens.empty()) {
      throw InvalidArgument("query '" + q.id + "' has no tokens");
    }
    for (TokenId t : q.tokens) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_a_.size()) {
        throw InvalidArgument("query '" + q.id + "': token id " +
                              std::to_string(t) + " out of range");
      }
    }
  }
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto& d = docs_[i];
    if (!doc_pos_.emplace(d.id, i).second) {
      throw InvalidArgument("duplicate doc_id '" + d.id + "'");
    }
    if (d.tokens.empty()) {
      throw InvalidArgument("document '" + d.id + "' has no tokens");
    }
    for (TokenId t : d.tokens) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_b_.size()) {
        throw InvalidArgument("document '" + d.id + "': token id " +
                              std::to_string(t) + " out of range");
      }
    }
  }
  std::unordered_map<std::string, int> mr_count;
  for (const auto& t : triples_) {
    if (!query_pos_.contains(t.query_id)) {
      throw InvalidArgument("dangling reference: query_id '" + t.query_id +
                            "'");
    }
    if (!doc_pos_.contains(t.doc_id)) {
      throw InvalidArgument("dangling reference: doc_id '" + t.doc_id +
                            "' (query '" + t.query_id + "')");
    }
    if (t.label < 1 || t.label > num_classes_) {
      throw InvalidArgument("label " + std::to_string(t.label) +
                            " outside [1, " + std::to_string(num_classes_) +
                            "]");
    }
    if (t.label == num_classes_ && ++mr_count[t.query_id] == 2) {
      multi_relevant_.push_back(t.query_id);
    }
  }
  std::sort(multi_relevant_.begin(), multi_relevant_.end());
}

const QueryRecord& Corpus::query(const std::string& id) const {
  auto it = query_pos_.find(id);
  if (it == query_pos_.end()) throw InvalidArgument("unknown query '" + id + "'");
  return queries_[it->second];
}

const DocumentRecord& Corpus::doc(const std::string& id) const {
  auto it = doc_pos_.find(id);
  if (it == doc_pos_.end()) throw InvalidArgument("unknown doc '" + id + "'");
  return docs_[it->second];
}

namespace {

class Fnv1a {
 public:
  void add(std::string_view s) {
    for (unsigned char c : s) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
    add_byte(0xff);
  }
  void add(std::int64_t v) {
    for (int i = 0; i < 8; ++i) add_byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  std::uint64_t value() const { return hash_; }

 private:
  void add_byte(unsigned char c) {
    hash_ ^= c;
    hash_ *= 0x100000001b3ULL;
  }
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t Corpus::fingerprint() const {
  Fnv1a h;
  for (const auto& t : vocab_a_.tokens()) h.add(t);
  for (const auto& t : vocab_b_.tokens()) h.add(t);
  for (const auto& q : queries_) {
    h.add(q.id);
    for (TokenId t : q.tokens) h.add(std::int64_t{t});
  }
  for (const auto& d : docs_) {
    h.add(d.id);
    for (TokenId t : d.tokens) h.add(std::int64_t{t});
  }
  for (const auto& t : triples_) {
    h.add(t.query_id);
    h.add(t.doc_id);
    h.add(std::int64_t{t.label});
  }
  return h.value();
}

// ---------------------------------------------------------------------------
// Split

CorpusSplit split_corpus(Corpus corpus, SplitRatio ratio, std::uint64_t seed) {
  const int total = ratio.train + ratio.validation + ratio.test;
  if (ratio.train < 0 || ratio.validation < 0 || ratio.test < 0 || total <= 0) {
    throw InvalidArgument("split ratio must be non-negative with positive sum");
  }
  std::vector<std::string> ids;
  ids.reserve(corpus.queries().size());
  for (const auto& q : corpus.queries()) ids.push_back(q.id);
  Rng rng(mix_seed(seed, 0x5151));
  rng.shuffle(std::span<std::string>(ids));

  const std::size_t n = ids.size();
  const auto n_train = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * ratio.train / total));
  const auto n_val = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(
                       static_cast<double>(n) * ratio.validation / total)));

  CorpusSplit split;
  split.ratio = ratio;
  split.seed = seed;
  split.train_queries.assign(ids.begin(), ids.begin() + n_train);
  split.validation_queries.assign(ids.begin() + n_train,
                                  ids.begin() + n_train + n_val);
  split.test_queries.assign(ids.begin() + n_train + n_val, ids.end());

  std::unordered_map<std::string, int> part;
  for (const auto& id : split.train_queries) part[id] = 0;
  for (const auto& id : split.validation_queries) part[id] = 1;
  for (const auto& id : split.test_queries) part[id] = 2;
  for (const auto& t : corpus.triples()) {
    switch (part.at(t.query_id)) {
      case 0: split.train.push_back(t); break;
      case 1: split.validation.push_back(t); break;
      default: split.test.push_back(t); break;
    }
  }
  split.corpus = std::move(corpus);
  return split;
}

// ---------------------------------------------------------------------------
// On-disk format

namespace {

std::vector<std::string> read_vocab_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.find_first_of(" \t") != std::string::npos) {
      throw FormatError(path.string(), line_no,
                        "vocabulary line must hold exactly one token");
    }
    tokens.push_back(line);
  }
  if (tokens.empty() || tokens.front() != Vocabulary::kOovToken) {
    throw FormatError(path.string(), 1,
                      std::string("line 0 must be ") + Vocabulary::kOovToken);
  }
  return tokens;
}

template <typename Record>
std::vector<Record> read_records(const fs::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<Record> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string(), line_no, "invalid JSON");
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("tokens") || !j["tokens"].is_array()) {
      throw FormatError(path.string(), line_no,
                        "expected {\"id\": string, \"tokens\": array}");
    }
    Record rec;
    rec.id = j["id"].get<std::string>();
    if (!seen.insert(rec.id).second) {
      throw FormatError(path.string(), line_no, "duplicate id '" + rec.id + "'");
    }
    for (const auto& tok : j["tokens"]) {
      if (tok.is_number_integer()) {
        const auto id = tok.get<std::int64_t>();
        if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
          throw FormatError(path.string(), line_no,
                            "token id " + std::to_string(id) + " out of range");
        }
        rec.tokens.push_back(static_cast<TokenId>(id));
      } else if (tok.is_string()) {
        rec.tokens.push_back(vocab.id(tok.get<std::string>()));
      } else {
        throw FormatError(path.string(), line_no, "token must be id or string");
      }
    }
    if (rec.tokens.empty()) {
      throw FormatError(path.string(), line_no, "record has no tokens");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<LabeledTriple> read_triples(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<LabeledTriple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw FormatError(path.string(), line_no,
                        "expected query_id<TAB>doc_id<TAB>label");
    }
    LabeledTriple t{fields[0], fields[1], 0};
    try {
      std::size_t used = 0;
      t.label = std::stoi(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError(path.string(), line_no,
                        "label is not an integer: '" + fields[2] + "'");
    }
    triples.push_back(std::move(t));
  }
  return triples;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

template <typename Record>
std::string records_to_jsonl(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) {
    json j;
    j["id"] = r.id;
    j["tokens"] = r.tokens;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

Corpus load_corpus(const fs::path& dir) {
  auto vocab_a = Vocabulary::from_tokens("a", read_vocab_file(dir / "vocab_a.txt"));
  auto vocab_b = Vocabulary::from_tokens("b", read_vocab_file(dir / "vocab_b.txt"));
  return load_corpus(dir, std::move(vocab_a), std::move(vocab_b));
}

Corpus load_corpus(const fs::path& dir, Vocabulary vocab_a, Vocabulary vocab_b) {
  auto queries = read_records<QueryRecord>(dir / "queries.jsonl", vocab_a);
  auto docs = read_records<DocumentRecord>(dir / "docs.jsonl", vocab_b);
  auto triples = read_triples(dir / "triples.tsv");

  std::unordered_set<std::string> qids, dids;
  for (const auto& q : queries) qids.insert(q.id);
  for (const auto& d : docs) dids.insert(d.id);
  const std::string tpath = (dir / "triples.tsv").string();
  int max_label = kDefaultNumClasses;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    if (!qids.contains(t.query_id)) {
      throw FormatError(tpath, i + 1,
                        "dangling reference: query_id '" + t.query_id + "'");
    }
    if (!dids.contains(t.doc_id)) {
      throw FormatError(tpath, i + 1,
                        "dangling reference: doc_id '" + t.doc_id + "'");
    }
    if (t.label < 1) {
      throw FormatError(tpath, i + 1, "label must be >= 1");
    }
    max_label = std::max(max_label, t.label);
  }
  return Corpus(std::move(vocab_a), std::move(vocab_b), std::move(queries),
                std::move(docs), std::move(triples), max_label);
}

void write_corpus(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  std::string va, vb;
  for (const auto& t : corpus.vocab_a().tokens()) va += t + "\n";
  for (const auto& t : corpus.vocab_b().tokens()) vb += t + "\n";
  write_text(dir / "vocab_a.txt", va);
  write_text(dir / "vocab_b.txt", vb);
  write_text(dir / "queries.jsonl", records_to_jsonl(corpus.queries()));
  write_text(dir / "docs.jsonl", records_to_jsonl(corpus.docs()));
  std::string tsv;
  for (const auto& t : corpus.triples()) {
    tsv += t.query_id + "\t" + t.doc_id + "\t" + std::to_string(t.label) + "\n";
  }
  write_text(dir / "triples.tsv", tsv);
}

void write_split(const CorpusSplit& split, const fs::path& dir) {
  write_corpus(split.corpus, dir);
  std::string tsv;
  for (const auto& id : split.train_queries) tsv += id + "\ttrain\n";
  for (const auto& id : split.validation_queries) tsv += id + "\tvalidation\n";
  for (const auto& id : split.test_queries) tsv += id + "\ttest\n";
  write_text(dir / "split.tsv", tsv);
  json manifest = {
      {"seed", split.seed},
      {"ratio", {split.ratio.train, split.ratio.validation, split.ratio.test}},
      {"fingerprint", split.corpus.fingerprint()},
      {"n_queries", split.corpus.queries().size()},
      {"n_docs", split.corpus.docs().size()},
      {"n_triples", split.corpus.triples().size()}};
  write_text(dir / "manifest.json", manifest.dump() + "\n");
}

CorpusSplit load_split(const fs::path& dir) {
  Corpus corpus = load_corpus(dir);
  const fs::path split_path = dir / "split.tsv";
  if (!fs::exists(split_path)) return split_corpus(std::move(corpus), {}, 0);

  CorpusSplit split;
  if (fs::exists(dir / "manifest.json")) {
    std::ifstream in(dir / "manifest.json");
    json m = json::parse(in);
    split.seed = m.value("seed", std::uint64_t{0});
    if (m.contains("ratio") && m["ratio"].size() == 3) {
      split.ratio = {m["ratio"][0].get<int>(), m["ratio"][1].get<int>(),
                     m["ratio"][2].get<int>()};
    }
  }
  std::ifstream in(split_path);
  std::unordered_map<std::string, int> part;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(split_path.string(), line_no, "expected id<TAB>part");
    }
    std::string id = line.substr(0, tab);
    std::string name = line.substr(tab + 1);
    if (!corpus.has_query(id)) {
      throw FormatError(split_path.string(), line_no,
                        "dangling reference: query_id '" + id + "'");
    }
    int p = name == "train" ? 0 : name == "validation" ? 1 : name == "test" ? 2 : -1;
    if (p < 0) throw FormatError(split_path.string(), line_no, "unknown partition");
    if (!part.emplace(id, p).second) {
      throw FormatError(split_path.string(), line_no, "query listed twice");
    }
    (p == 0 ? split.train_queries
            : p == 1 ? split.validation_queries : split.test_queries)
        .push_back(id);
  }
  if (part.size() != corpus.queries().size()) {
    throw FormatError(split_path.string(), 0, "split does not cover all queries");
  }
  for (const auto& t : corpus.triples()) {
    const int p = part.at(t.query_id);
    (p == 0 ? split.train : p == 1 ? split.validation : split.test).push_back(t);
  }
  split.corpus = std::move(corpus);
  return split;
}

// ---------------------------------------------------------------------------
// Synthetic generation

SyntheticConfig SyntheticConfig::from_key_values(const KeyValues& kv) {
  SyntheticConfig c;
  c.vocab_size_a = static_cast<int>(kv.get_int("vocab_size_a", c.vocab_size_a));
  c.vocab_size_b = static_cast<int>(kv.get_int("vocab_size_b", c.vocab_size_b));
  c.n_queries = static_cast<int>(kv.get_int("n_queries", c.n_queries));
  c.nr_per_query = static_cast<int>(kv.get_int("nr_per_query", c.nr_per_query));
  c.sr_mean = kv.get_double("sr_mean", c.sr_mean);
  c.query_len_range = kv.get_range("query_len_range", c.query_len_range);
  c.doc_len_range = kv.get_range("doc_len_range", c.doc_len_range);
  c.sr_overlap_frac = kv.get_double("sr_overlap_frac", c.sr_overlap_frac);
  c.zipf_exponent = kv.get_double("zipf_exponent", c.zipf_exponent);
  c.noise_zipf_exponent = kv.get_double("noise_zipf_exponent", c.noise_zipf_exponent);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
  return c;
}

KeyValues SyntheticConfig::to_key_values() const {
  KeyValues kv;
  kv.set("vocab_size_a", std::to_string(vocab_size_a));
  kv.set("vocab_size_b", std::to_string(vocab_size_b));
  kv.set("n_queries", std::to_string(n_queries));
  kv.set("nr_per_query", std::to_string(nr_per_query));
  kv.set("sr_mean", format_double(sr_mean));
  kv.set("query_len_range", std::to_string(query_len_range.first) + "," +
                                std::to_string(query_len_range.second));
  kv.set("doc_len_range", std::to_string(doc_len_range.first) + "," +
                              std::to_string(doc_len_range.second));
  kv.set("sr_overlap_frac", format_double(sr_overlap_frac));
  kv.set("zipf_exponent", format_double(zipf_exponent));
  kv.set("noise_zipf_exponent", format_double(noise_zipf_exponent));
  kv.set("seed", std::to_string(seed));
  return kv;
}

void SyntheticConfig::validate() const {
  if (n_queries < 0 || nr_per_query < 0 || sr_mean < 0.0) {
    throw InvalidArgument("n_queries, nr_per_query and sr_mean must be >= 0");
  }
  if (query_len_range.first < 1 || query_len_range.second < query_len_range.first ||
      doc_len_range.first < 1 || doc_len_range.second < doc_len_range.first) {
    throw InvalidArgument("length ranges must satisfy 1 <= lo <= hi");
  }
  if (sr_overlap_frac < 0.0 || sr_overlap_frac > 1.0) {
    throw InvalidArgument("sr_overlap_frac must lie in [0, 1]");
  }
  if (!(zipf_exponent >= 0.0) || !(noise_zipf_exponent >= 0.0)) {
    throw InvalidArgument("Zipf exponents must be >= 0");
  }
  // Query tokens are distinct and map injectively into language B.
  if (vocab_size_a - 1 < query_len_range.second) {
    throw InvalidArgument("vocab_size_a too small for " +
                          std::to_string(query_len_range.second) +
                          " distinct query tokens");
  }
  if (vocab_size_b < vocab_size_a) {
    throw InvalidArgument(
        "vocab_size_b must be >= vocab_size_a for an injective token map");
  }
}

namespace {

// Knuth's multiplicative method; fine for the small means used here.
int sample_poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double p = rng.uniform();
  while (p > limit) {
    ++k;
    p *= rng.uniform();
  }
  return k;
}

// Token ids 1..vocab_size-1 with P(id) proportional to id^-exponent.
// Exponent 0 is uniform.
class ZipfSampler {
 public:
  ZipfSampler(int vocab_size, double exponent) : cdf_(vocab_size - 1) {
    double total = 0.0;
    for (int id = 1; id < vocab_size; ++id) {
      total += std::pow(static_cast<double>(id), -exponent);
      cdf_[id - 1] = total;
    }
    for (double& c : cdf_) c /= total;
  }

  TokenId operator()(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto idx = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
    return static_cast<TokenId>(idx + 1);
  }

  std::vector<TokenId> draw(Rng& rng, std::size_t count) const {
    std::vector<TokenId> out(count);
    for (auto& t : out) t = (*this)(rng);
    return out;
  }

  // Distinct ids, by rejection; count is far below the vocabulary size.
  std::vector<TokenId> draw_distinct(Rng& rng, std::size_t count) const {
    std::vector<TokenId> out;
    std::unordered_set<TokenId> seen;
    while (out.size() < count) {
      const TokenId t = (*this)(rng);
      if (seen.insert(t).second) out.push_back(t);
    }
    return out;
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

std::vector<LabeledTriple> negative_sample(
    const QueryRecord& query, std::span<const DocumentRecord> all_docs,
    std::size_t k, std::uint64_t seed,
    const std::unordered_set<std::string>& exclude) {
  std::vector<std::size_t> pool;
  pool.reserve(all_docs.size());
  for (std::size_t i = 0; i < all_docs.size(); ++i) {
    if (!exclude.contains(all_docs[i].id)) pool.push_back(i);
  }
  if (k > pool.size()) {
    throw InvalidArgument("negative_sample: requested " + std::to_string(k) +
                          " negatives but only " + std::to_string(pool.size()) +
                          " candidates remain for query '" + query.id + "'");
  }
  Rng rng(seed);
  std::vector<LabeledTriple> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
    out.push_back({query.id, all_docs[pool[i]].id, kIrrelevant});
  }
  return out;
}

CorpusSplit generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(mix_seed(seed, 1));

  Vocabulary vocab_a("a"), vocab_b("b");
  for (int i = 1; i < config.vocab_size_a; ++i) vocab_a.add("a" + std::to_string(i));
  for (int i = 1; i < config.vocab_size_b; ++i) vocab_b.add("b" + std::to_string(i));

  // Planted correspondence: a -> translation[a], injective.
  std::vector<TokenId> b_ids(config.vocab_size_b - 1);
  for (std::size_t i = 0; i < b_ids.size(); ++i) b_ids[i] = static_cast<TokenId>(i + 1);
  rng.shuffle(std::span<TokenId>(b_ids));
  std::vector<TokenId> translation(config.vocab_size_a, Vocabulary::kOovId);
  for (int a = 1; a < config.vocab_size_a; ++a) translation[a] = b_ids[a - 1];

  const ZipfSampler query_tokens(config.vocab_size_a, config.zipf_exponent);
  const ZipfSampler noise_tokens(config.vocab_size_b, config.noise_zipf_exponent);

  std::vector<QueryRecord> queries;
  std::vector<DocumentRecord> docs;
  std::vector<LabeledTriple> triples;
  std::vector<std::vector<LabeledTriple>> positives(config.n_queries);
  int next_doc = 0;
  auto new_doc_id = [&] { return "d" + std::to_string(next_doc++); };

  auto doc_len = [&](std::size_t at_least) {
    const auto len = rng.between(config.doc_len_range.first, config.doc_len_range.second);
    return std::max<std::size_t>(static_cast<std::size_t>(len), at_least);
  };

  for (int qi = 0; qi < config.n_queries; ++qi) {
    QueryRecord q;
    q.id = "q" + std::to_string(qi);
    const auto lq = static_cast<std::size_t>(
        rng.between(config.query_len_range.first, config.query_len_range.second));
    q.tokens = query_tokens.draw_distinct(rng, lq);

    // MR: every mapped query token plus noise.
    DocumentRecord mr;
    mr.id = new_doc_id();
    for (TokenId a : q.tokens) mr.tokens.push_back(translation[a]);
    const std::size_t mr_len = doc_len(lq);
    auto noise = noise_tokens.draw(rng, mr_len - lq);
    mr.tokens.insert(mr.tokens.end(), noise.begin(), noise.end());
    rng.shuffle(std::span<TokenId>(mr.tokens));
    positives[qi].push_back({q.id, mr.id, kRelevant});
    docs.push_back(std::move(mr));

    // SR: a fraction of the mapped tokens plus noise.
    const int n_sr = sample_poisson(rng, config.sr_mean);
    const auto shared = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.sr_overlap_frac * lq)));
    for (int s = 0; s < n_sr; ++s) {
      DocumentRecord sr;
      sr.id = new_doc_id();
      std::vector<TokenId> pick = q.tokens;
      for (std::size_t i = 0; i < shared; ++i) {
        const std::size_t j = i + rng.below(pick.size() - i);
        std::swap(pick[i], pick[j]);
        sr.tokens.push_back(translation[pick[i]]);
      }
      const std::size_t sr_len = doc_len(shared);
      auto fill = noise_tokens.draw(rng, sr_len - shared);
      sr.tokens.insert(sr.tokens.end(), fill.begin(), fill.end());
      rng.shuffle(std::span<TokenId>(sr.tokens));
      positives[qi].push_back({q.id, sr.id, kPartiallyRelevant});
      docs.push_back(std::move(sr));
    }
    queries.push_back(std::move(q));
  }

  // Background pool of unrelated documents; NR candidates come from here.
  const std::size_t pool_size =
      config.nr_per_query == 0
          ? 0
          : std::max<std::size_t>(
                static_cast<std::size_t>(config.nr_per_query),
                (static_cast<std::size_t>(config.n_queries) * config.nr_per_query + 1) / 2);
  std::vector<DocumentRecord> background;
  background.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) {
    DocumentRecord d;
    d.id = new_doc_id();
    d.tokens = noise_tokens.draw(rng, doc_len(1));
    background.push_back(std::move(d));
  }

  const std::unordered_set<std::string> no_exclusions;
  for (int qi = 0; qi < config.n_queries; ++qi) {
    auto nr = negative_sample(queries[qi], background,
                              static_cast<std::size_t>(config.nr_per_query),
                              mix_seed(seed, 1000 + static_cast<std::uint64_t>(qi)),
                              no_exclusions);
    triples.insert(triples.end(), positives[qi].begin(), positives[qi].end());
    triples.insert(triples.end(), nr.begin(), nr.end());
  }
  docs.insert(docs.end(), std::make_move_iterator(background.begin()),
              std::make_move_iterator(background.end()));

  Corpus corpus(std::move(vocab_a), std::move(vocab_b), std::move(queries),
                std::move(docs), std::move(triples));
  return split_corpus(std::move(corpus), SplitRatio{}, seed);
}

}  // namespace xlir
