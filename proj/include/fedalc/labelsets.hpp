/*
 * Copyright 2026 The fedalc Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDALC_LABELSETS_HPP_
#define FEDALC_LABELSETS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fedalc/data.hpp"
#include "fedalc/model.hpp"
#include "fedalc/numeric.hpp"

namespace fedalc {

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& d);

struct HashMessage {
  Digest digest{};
  Label label = 0;

  bool operator==(const HashMessage&) const = default;
};

struct LabelSetEntry {
  Digest key{};
  std::vector<Label> positives;  // sorted, unique, non-empty
};

// Per-instance positive label sets recovered on the server. Negatives are the
// complement of each positive set and are never stored.
struct LabelSetTable {
  Index num_labels = 0;
  std::vector<LabelSetEntry> entries;  // sorted by key, keys unique

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// Ordered-pair weights over C labels with a zero diagonal, stored as
//   sigma(u, v) = (row_base[u] + offsets(u, v)) / row_divisor[u],   u != v.
// Label-set statistics give row_base = marginal count of u, a sparse
// offsets = -co-occurrence count and row_divisor = n, so only co-occurring
// pairs are stored and each weight is a single correctly rounded division.
class SigmaWeights {
 public:
  using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SigmaWeights() = default;
  SigmaWeights(Vector row_divisor, Vector row_base, SparseRows offsets);

  static SigmaWeights from_dense(const Matrix& weights);
  static SigmaWeights uniform(Index classes, double value);

  Index size() const { return row_base_.size(); }
  double operator()(Index u, Index v) const;

  // Row u as a dense vector with a zero at position u.
  Vector row(Index u) const;
  Vector row_sums() const;
  // Row sums before division by row_divisor.
  Vector row_totals() const;

  // Dense C x C copy; refused above kDenseLimit labels.
  Matrix to_dense() const;
  static constexpr Index kDenseLimit = 4096;

  // Every weight multiplied by factor >= 0.
  SigmaWeights scaled(double factor) const;
  SigmaWeights with_divisors(Vector row_divisor) const;

  const Vector& row_divisor() const { return row_divisor_; }
  const Vector& row_base() const { return row_base_; }
  const SparseRows& offsets() const { return offsets_; }

 private:
  Vector row_divisor_;
  Vector row_base_;
  SparseRows offsets_;
};

Digest hash_instance(std::span<const std::uint8_t> canonical_bytes);

enum class Canonicalization { kRawFeatures, kInitialEmbedding };

// Raw mode: per stored entry, little-endian u64 index then f64 value. Embedding
// mode: per output coordinate of forward(params, x), little-endian i64 of
// round(value * 1e6).
std::vector<std::uint8_t> canonicalize_instance(const SparseVector& x,
                                                Canonicalization mode,
                                                const ModelParams* params);

// Client side of label collection: one message per local instance.
std::vector<HashMessage> client_messages(const ClientShard& shard,
                                         Canonicalization mode,
                                         const ModelParams* params);

// Server side: positives of each digest are the union of the labels sent with
// it. Entries are ordered by digest.
LabelSetTable merge_messages(std::span<const std::vector<HashMessage>> batches,
                             Index num_labels);

enum class SigmaCounting {
  // sigma(u, v) = (1/n) sum_j I(u in P_j and v not in P_j)
  kInstanceCount,
  // Each instance's indicators are further divided by |P_j|.
  kPerInstanceNormalized,
};

SigmaWeights compute_sigma(
    const LabelSetTable& labels,
    SigmaCounting counting = SigmaCounting::kInstanceCount);

// Number of instances carrying each label.
Vector label_marginals(const LabelSetTable& labels);
// Off-diagonal co-occurrence counts c(u, v) = #{j : u, v in P_j}.
SigmaWeights::SparseRows label_cooccurrence(const LabelSetTable& labels);

// Wire record: 32-byte digest then u32 LE label. A batch is a u64 LE record
// count followed by the records.
inline constexpr std::size_t kWireRecordBytes = 36;
std::vector<std::uint8_t> encode_messages(std::span<const HashMessage> msgs);
std::vector<HashMessage> decode_messages(std::span<const std::uint8_t> bytes);
void write_message_file(const std::filesystem::path& path,
                        std::span<const HashMessage> msgs);
std::vector<HashMessage> read_message_file(const std::filesystem::path& path);

// Seeded relabeling shared by clients so the server only sees opaque label ids.
class LabelObfuscator {
 public:
  LabelObfuscator(std::uint64_t seed, Index num_labels);

  Label conceal(Label true_label) const;
  Label reveal(Label opaque) const;
  void conceal_all(std::vector<HashMessage>& batch) const;
  // Maps weights indexed by opaque ids back to true label order.
  SigmaWeights reveal(const SigmaWeights& opaque) const;

 private:
  std::vector<Label> forward_;
  std::vector<Label> inverse_;
};

}  // namespace fedalc

#endif  // FEDALC_LABELSETS_HPP_
