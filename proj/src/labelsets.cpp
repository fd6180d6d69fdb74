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

#include "fedalc/labelsets.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>

namespace fedalc {

std::string to_hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(d.size() * 2);
  for (auto b : d) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

SigmaWeights::SigmaWeights(Vector row_divisor, Vector row_base,
                           SparseRows offsets)
    : row_divisor_(std::move(row_divisor)),
      row_base_(std::move(row_base)),
      offsets_(std::move(offsets)) {
  const Index c = row_base_.size();
  if (row_divisor_.size() != c || offsets_.rows() != c ||
      offsets_.cols() != c) {
    throw DimensionError("SigmaWeights: inconsistent component shapes");
  }
  if (!(row_divisor_.array() > 0.0).all()) {
    throw RangeError("SigmaWeights: row divisors must be positive");
  }
}

SigmaWeights SigmaWeights::from_dense(const Matrix& weights) {
  if (weights.rows() != weights.cols()) {
    throw DimensionError("SigmaWeights::from_dense: matrix must be square");
  }
  const Index c = weights.rows();
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index u = 0; u < c; ++u) {
    for (Index v = 0; v < c; ++v) {
      if (u != v && weights(u, v) != 0.0) {
        triplets.emplace_back(u, v, weights(u, v));
      }
    }
  }
  SparseRows offsets(c, c);
  offsets.setFromTriplets(triplets.begin(), triplets.end());
  return SigmaWeights(Vector::Ones(c), Vector::Zero(c), std::move(offsets));
}

SigmaWeights SigmaWeights::uniform(Index classes, double value) {
  SparseRows empty(classes, classes);
  return SigmaWeights(Vector::Ones(classes), Vector::Constant(classes, value),
                      std::move(empty));
}

double SigmaWeights::operator()(Index u, Index v) const {
  if (u == v) return 0.0;
  return (row_base_[u] + offsets_.coeff(u, v)) / row_divisor_[u];
}

Vector SigmaWeights::row(Index u) const {
  Vector r = Vector::Constant(size(), row_base_[u]);
  for (SparseRows::InnerIterator it(offsets_, u); it; ++it) {
    r[it.col()] += it.value();
  }
  r /= row_divisor_[u];
  r[u] = 0.0;
  return r;
}

Vector SigmaWeights::row_totals() const {
  Vector totals(size());
  for (Index u = 0; u < size(); ++u) {
    double off = 0.0;
    for (SparseRows::InnerIterator it(offsets_, u); it; ++it) {
      if (it.col() != u) off += it.value();
    }
    totals[u] = static_cast<double>(size() - 1) * row_base_[u] + off;
  }
  return totals;
}

Vector SigmaWeights::row_sums() const {
  return row_totals().cwiseQuotient(row_divisor_);
}

Matrix SigmaWeights::to_dense() const {
  if (size() > kDenseLimit) {
    throw RangeError("SigmaWeights::to_dense: C exceeds dense limit");
  }
  Matrix m(size(), size());
  for (Index u = 0; u < size(); ++u) m.row(u) = row(u).transpose();
  return m;
}

SigmaWeights SigmaWeights::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw RangeError("SigmaWeights::scaled: factor must be finite and >= 0");
  }
  if (factor == 0.0) {
    return SigmaWeights(row_divisor_, Vector::Zero(size()),
                        SparseRows(size(), size()));
  }
  return SigmaWeights(row_divisor_ / factor, row_base_, offsets_);
}

SigmaWeights SigmaWeights::with_divisors(Vector row_divisor) const {
  if (row_divisor.size() != size()) {
    throw DimensionError("SigmaWeights::with_divisors: length mismatch");
  }
  return SigmaWeights(std::move(row_divisor), row_base_, offsets_);
}

Digest hash_instance(std::span<const std::uint8_t> canonical_bytes) {
  if (canonical_bytes.empty()) {
    throw DegenerateInputError("hash_instance: empty input");
  }
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(canonical_bytes.data(), canonical_bytes.size(), out.data(),
                 &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw Error("hash_instance: SHA-256 failed");
  }
  return out;
}

namespace {

template <typename T>
void append_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), std::begin(raw), std::end(raw));
}

template <typename T>
T read_le(const std::uint8_t* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

}  // namespace

std::vector<std::uint8_t> canonicalize_instance(const SparseVector& x,
                                                Canonicalization mode,
                                                const ModelParams* params) {
  std::vector<std::uint8_t> out;
  if (mode == Canonicalization::kRawFeatures) {
    out.reserve(static_cast<std::size_t>(x.nonZeros()) * 16);
    for (SparseVector::InnerIterator it(x); it; ++it) {
      append_le<std::uint64_t>(out, static_cast<std::uint64_t>(it.index()));
      append_le<double>(out, it.value());
    }
    return out;
  }
  if (params == nullptr) {
    throw Error("canonicalize_instance: embedding mode needs model params");
  }
  const auto [emb, cache] = forward(*params, x);
  out.reserve(static_cast<std::size_t>(emb.size()) * 8);
  for (Index i = 0; i < emb.size(); ++i) {
    append_le<std::int64_t>(out, std::llround(emb[i] * 1e6));
  }
  return out;
}

std::vector<HashMessage> client_messages(const ClientShard& shard,
                                         Canonicalization mode,
                                         const ModelParams* params) {
  std::vector<HashMessage> out;
  out.reserve(shard.instances.size());
  for (const auto& x : shard.instances) {
    const auto bytes = canonicalize_instance(x, mode, params);
    out.push_back({hash_instance(bytes), shard.label});
  }
  return out;
}

LabelSetTable merge_messages(std::span<const std::vector<HashMessage>> batches,
                             Index num_labels) {
  std::map<Digest, std::vector<Label>> merged;
  for (const auto& batch : batches) {
    for (const auto& msg : batch) {
      if (static_cast<Index>(msg.label) >= num_labels) {
        throw RangeError("merge_messages: label " + std::to_string(msg.label) +
                         " >= C=" + std::to_string(num_labels));
      }
      merged[msg.digest].push_back(msg.label);
    }
  }
  LabelSetTable table;
  table.num_labels = num_labels;
  table.entries.reserve(merged.size());
  for (auto& [key, labels] : merged) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    table.entries.push_back({key, std::move(labels)});
  }
  return table;
}

namespace {

double instance_weight(const LabelSetEntry& e, SigmaCounting counting) {
  return counting == SigmaCounting::kPerInstanceNormalized
             ? 1.0 / static_cast<double>(e.positives.size())
             : 1.0;
}

void check_table(const LabelSetTable& labels) {
  for (const auto& e : labels.entries) {
    if (e.positives.empty()) {
      throw DegenerateInputError("label set table has an empty positive set");
    }
    for (Label u : e.positives) {
      if (static_cast<Index>(u) >= labels.num_labels) {
        throw RangeError("label set table holds label " + std::to_string(u) +
                         " >= C=" + std::to_string(labels.num_labels));
      }
    }
  }
}

Vector weighted_marginals(const LabelSetTable& labels, SigmaCounting counting) {
  Vector m = Vector::Zero(labels.num_labels);
  for (const auto& e : labels.entries) {
    const double w = instance_weight(e, counting);
    for (Label u : e.positives) m[u] += w;
  }
  return m;
}

SigmaWeights::SparseRows weighted_cooccurrence(const LabelSetTable& labels,
                                               SigmaCounting counting) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& e : labels.entries) {
    const double w = instance_weight(e, counting);
    for (Label u : e.positives) {
      for (Label v : e.positives) {
        if (u != v) triplets.emplace_back(u, v, w);
      }
    }
  }
  SigmaWeights::SparseRows c(labels.num_labels, labels.num_labels);
  c.setFromTriplets(triplets.begin(), triplets.end());
  return c;
}

}  // namespace

Vector label_marginals(const LabelSetTable& labels) {
  check_table(labels);
  return weighted_marginals(labels, SigmaCounting::kInstanceCount);
}

SigmaWeights::SparseRows label_cooccurrence(const LabelSetTable& labels) {
  check_table(labels);
  return weighted_cooccurrence(labels, SigmaCounting::kInstanceCount);
}

SigmaWeights compute_sigma(const LabelSetTable& labels,
                           SigmaCounting counting) {
  if (labels.empty()) throw DegenerateInputError("compute_sigma: empty table");
  check_table(labels);
  const double n = static_cast<double>(labels.size());
  SigmaWeights::SparseRows offsets = -weighted_cooccurrence(labels, counting);
  return SigmaWeights(Vector::Constant(labels.num_labels, n),
                      weighted_marginals(labels, counting), std::move(offsets));
}

std::vector<std::uint8_t> encode_messages(std::span<const HashMessage> msgs) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + msgs.size() * kWireRecordBytes);
  append_le<std::uint64_t>(out, msgs.size());
  for (const auto& m : msgs) {
    out.insert(out.end(), m.digest.begin(), m.digest.end());
    append_le<std::uint32_t>(out, m.label);
  }
  return out;
}

std::vector<HashMessage> decode_messages(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw ParseError("message batch: missing header", 0);
  const auto count = read_le<std::uint64_t>(bytes.data());
  if ((bytes.size() - 8) / kWireRecordBytes != count ||
      (bytes.size() - 8) % kWireRecordBytes != 0) {
    throw ParseError("message batch: header count " + std::to_string(count) +
                         " does not match payload of " +
                         std::to_string(bytes.size() - 8) + " bytes",
                     0);
  }
  std::vector<HashMessage> out(count);
  const std::uint8_t* p = bytes.data() + 8;
  for (auto& m : out) {
    std::memcpy(m.digest.data(), p, m.digest.size());
    m.label = read_le<std::uint32_t>(p + m.digest.size());
    p += kWireRecordBytes;
  }
  return out;
}

void write_message_file(const std::filesystem::path& path,
                        std::span<const HashMessage> msgs) {
  const auto bytes = encode_messages(msgs);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<HashMessage> read_message_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_messages(bytes);
}

LabelObfuscator::LabelObfuscator(std::uint64_t seed, Index num_labels)
    : forward_(static_cast<std::size_t>(num_labels)),
      inverse_(static_cast<std::size_t>(num_labels)) {
  std::iota(forward_.begin(), forward_.end(), Label{0});
  std::mt19937_64 rng(seed);
  std::shuffle(forward_.begin(), forward_.end(), rng);
  for (std::size_t u = 0; u < forward_.size(); ++u) {
    inverse_[forward_[u]] = static_cast<Label>(u);
  }
}

Label LabelObfuscator::conceal(Label true_label) const {
  return forward_.at(true_label);
}

Label LabelObfuscator::reveal(Label opaque) const {
  return inverse_.at(opaque);
}

void LabelObfuscator::conceal_all(std::vector<HashMessage>& batch) const {
  for (auto& m : batch) m.label = conceal(m.label);
}

SigmaWeights LabelObfuscator::reveal(const SigmaWeights& opaque) const {
  const Index c = opaque.size();
  if (c != static_cast<Index>(forward_.size())) {
    throw DimensionError("LabelObfuscator::reveal: size mismatch");
  }
  Vector divisor(c), base(c);
  for (Index u = 0; u < c; ++u) {
    divisor[u] = opaque.row_divisor()[forward_[u]];
    base[u] = opaque.row_base()[forward_[u]];
  }
  std::vector<Eigen::Triplet<double>> triplets;
  const auto& off = opaque.offsets();
  for (Index a = 0; a < off.outerSize(); ++a) {
    for (SigmaWeights::SparseRows::InnerIterator it(off, a); it; ++it) {
      triplets.emplace_back(inverse_[it.row()], inverse_[it.col()], it.value());
    }
  }
  SigmaWeights::SparseRows offsets(c, c);
  offsets.setFromTriplets(triplets.begin(), triplets.end());
  return SigmaWeights(std::move(divisor), std::move(base), std::move(offsets));
}

}  // namespace fedalc
