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

#include "xlir/encoder.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "xlir/error.h"
#include "xlir/kv_config.h"
#include "xlir/rng.h"

namespace xlir {

EmbeddingTable::EmbeddingTable(std::string language_tag, std::size_t vocab_size,
                               std::size_t dim)
    : language_tag_(std::move(language_tag)),
      vocab_size_(vocab_size),
      dim_(dim),
      data_(vocab_size * dim, 0.0) {
  if (dim == 0) throw InvalidArgument("embedding dimension must be >= 1");
}

std::span<double> EmbeddingTable::row(TokenId id) {
  return std::span<double>(data_).subspan(static_cast<std::size_t>(id) * dim_, dim_);
}

std::span<const double> EmbeddingTable::row(TokenId id) const {
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(id) * dim_,
                                                dim_);
}

namespace {

struct WeightedToken {
  TokenId id;
  double weight;  // occurrences / length
};

// Distinct tokens in ascending id order with their pooling weights. Summing in
// this order makes pooling independent of token order, bit for bit.
std::vector<WeightedToken> pooling_weights(std::span<const TokenId> tokens) {
  std::vector<TokenId> sorted(tokens.begin(), tokens.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<WeightedToken> out;
  const double length = static_cast<double>(tokens.size());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.push_back({sorted[i], static_cast<double>(j - i) / length});
    i = j;
  }
  return out;
}

}  // namespace

EncodedVector encode(const EmbeddingTable& table, std::span<const TokenId> tokens) {
  if (tokens.empty()) throw InvalidArgument("encode: empty token list");
  for (TokenId t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= table.vocab_size()) {
      throw InvalidArgument("encode: token id " + std::to_string(t) +
                            " out of range for table of " +
                            std::to_string(table.vocab_size()) + " rows");
    }
  }
  const std::size_t p = table.dim();
  EncodedVector out;
  out.length = tokens.size();
  out.pre_activation.assign(p, 0.0);
  for (const auto& [id, weight] : pooling_weights(tokens)) {
    auto r = table.row(id);
    for (std::size_t j = 0; j < p; ++j) out.pre_activation[j] += weight * r[j];
  }
  out.values.resize(p);
  for (std::size_t j = 0; j < p; ++j) out.values[j] = std::tanh(out.pre_activation[j]);
  return out;
}

void encode_backward_into(GradientPacket& packet, TableId table_id,
                          std::span<const TokenId> tokens,
                          const EncodedVector& cached,
                          std::span<const double> upstream, double scale) {
  const std::size_t p = cached.dim();
  if (upstream.size() != p || cached.pre_activation.size() != p ||
      packet.dim() != p) {
    throw InvalidArgument("encode_backward: dimension mismatch");
  }
  if (tokens.size() != cached.length) {
    throw InvalidArgument("encode_backward: cached encoding is for " +
                          std::to_string(cached.length) + " tokens, got " +
                          std::to_string(tokens.size()));
  }
  // d values_j / d pre_j = 1 - tanh^2(pre_j)
  std::vector<double> local(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double t = cached.values[j];
    local[j] = scale * upstream[j] * (1.0 - t * t);
  }
  for (const auto& [id, weight] : pooling_weights(tokens)) {
    packet.accumulate({table_id, id}, local, weight);
  }
}

GradientPacket encode_backward(const EmbeddingTable& table, TableId table_id,
                               std::span<const TokenId> tokens,
                               const EncodedVector& cached,
                               std::span<const double> upstream) {
  if (cached.dim() != table.dim()) {
    throw InvalidArgument("encode_backward: dimension mismatch");
  }
  GradientPacket packet(table.dim());
  encode_backward_into(packet, table_id, tokens, cached, upstream);
  return packet;
}

EmbeddingTable init_embeddings(std::size_t vocab_size, std::size_t dim,
                               std::uint64_t seed, double scale,
                               std::string language_tag) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidArgument("init_embeddings: scale must be positive and finite");
  }
  EmbeddingTable table(std::move(language_tag), vocab_size, dim);
  Rng rng(seed);
  for (double& v : table.data()) v = rng.uniform(-scale, scale);
  return table;
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write checkpoint " + path.string());
  out << "xlir-checkpoint 1\n";
  out << "manifest seed=" << checkpoint.seed << " step=" << checkpoint.step << "\n";
  for (const EmbeddingTable* table : {&checkpoint.params.query, &checkpoint.params.doc}) {
    out << "table " << (table->language_tag().empty() ? "-" : table->language_tag())
        << " " << table->vocab_size() << " " << table->dim() << "\n";
    const auto data = table->data();
    for (std::size_t r = 0; r < table->vocab_size(); ++r) {
      for (std::size_t j = 0; j < table->dim(); ++j) {
        if (j) out << ' ';
        out << format_double(data[r * table->dim() + j]);
      }
      out << '\n';
    }
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open checkpoint " + path.string());
  const std::string name = path.string();
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      throw FormatError(name, line_no + 1, "unexpected end of checkpoint");
    }
    ++line_no;
    return line;
  };

  if (next_line() != "xlir-checkpoint 1") {
    throw FormatError(name, line_no, "not an xlir checkpoint");
  }
  Checkpoint ck;
  {
    std::istringstream header(next_line());
    std::string tag, seed_kv, step_kv;
    header >> tag >> seed_kv >> step_kv;
    if (tag != "manifest" || seed_kv.rfind("seed=", 0) != 0 ||
        step_kv.rfind("step=", 0) != 0) {
      throw FormatError(name, line_no, "bad manifest line");
    }
    ck.seed = std::stoull(seed_kv.substr(5));
    ck.step = std::stoll(step_kv.substr(5));
  }
  for (EmbeddingTable* table : {&ck.params.query, &ck.params.doc}) {
    std::istringstream header(next_line());
    std::string word, tag;
    std::size_t rows = 0, dim = 0;
    if (!(header >> word >> tag >> rows >> dim) || word != "table" || dim == 0) {
      throw FormatError(name, line_no, "bad table header");
    }
    *table = EmbeddingTable(tag == "-" ? "" : tag, rows, dim);
    auto data = table->data();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::string& row_text = next_line();
      const char* ptr = row_text.data();
      const char* end = ptr + row_text.size();
      for (std::size_t j = 0; j < dim; ++j) {
        while (ptr < end && *ptr == ' ') ++ptr;
        double v = 0.0;
        auto [next, ec] = std::from_chars(ptr, end, v);
        if (ec != std::errc() || !std::isfinite(v)) {
          throw FormatError(name, line_no, "bad embedding value");
        }
        data[r * dim + j] = v;
        ptr = next;
      }
      if (ptr != end) throw FormatError(name, line_no, "trailing data in row");
    }
  }
  return ck;
}

}  // namespace xlir
