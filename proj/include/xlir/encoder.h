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

#ifndef XLIR_ENCODER_H_
#define XLIR_ENCODER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xlir/corpus.h"
#include "xlir/gradient.h"

namespace xlir {

inline constexpr std::size_t kDefaultEmbeddingDim = 64;

// Dense (vocab_size x dim) row-major embedding matrix for one language.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string language_tag, std::size_t vocab_size,
                 std::size_t dim);

  const std::string& language_tag() const { return language_tag_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }

  std::span<double> row(TokenId id);
  std::span<const double> row(TokenId id) const;
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::string language_tag_;
  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// tanh(mean of token rows), with the pre-activation mean kept for backward.
struct EncodedVector {
  std::vector<double> values;
  std::vector<double> pre_activation;
  std::size_t length = 0;  // number of pooled tokens

  std::size_t dim() const { return values.size(); }
};

// Throws InvalidArgument on an empty token list or an out-of-range id.
EncodedVector encode(const EmbeddingTable& table, std::span<const TokenId> tokens);

// Gradient of <upstream, encode(tokens)> with respect to the embedding rows:
// row tokens[i], component j gets upstream_j * (1 - tanh^2(m_j)) / l.
// Repeated tokens accumulate.
GradientPacket encode_backward(const EmbeddingTable& table, TableId table_id,
                               std::span<const TokenId> tokens,
                               const EncodedVector& cached,
                               std::span<const double> upstream);

// Same as encode_backward, accumulating scale * gradient into `packet`.
void encode_backward_into(GradientPacket& packet, TableId table_id,
                          std::span<const TokenId> tokens,
                          const EncodedVector& cached,
                          std::span<const double> upstream, double scale = 1.0);

// Entries i.i.d. uniform in [-scale, scale]. The usual scale is 0.5 / dim.
EmbeddingTable init_embeddings(std::size_t vocab_size, std::size_t dim,
                               std::uint64_t seed, double scale,
                               std::string language_tag = "");

inline double default_init_scale(std::size_t dim) {
  return 0.5 / static_cast<double>(dim);
}

// Query-side and document-side tables; both trainable, no sharing.
struct ModelParams {
  EmbeddingTable query;
  EmbeddingTable doc;

  EmbeddingTable& table(TableId id) {
    return id == TableId::kQuery ? query : doc;
  }
  const EmbeddingTable& table(TableId id) const {
    return id == TableId::kQuery ? query : doc;
  }
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
};

// Text format, lossless at double precision (shortest round-trip decimal):
//   xlir-checkpoint 1
//   manifest seed=<u64> step=<i64>
//   table <tag> <vocab_size> <dim>
//   <dim values>            (one line per row)
//   table ...
void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xlir

#endif  // XLIR_ENCODER_H_
