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

#include "fedalc/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace fedalc {

static_assert(std::endian::native == std::endian::little,
              "checkpoint and wire formats assume a little-endian host");

ModelDims ModelParams::dims() const {
  return ModelDims{embed_table.rows(), embed_table.cols(), layer1.out(),
                   layer2.out(), layer3.out()};
}

RowMajorMatrix ModelGrads::dense_embed(Index features) const {
  RowMajorMatrix out = RowMajorMatrix::Zero(features, embed_grad.cols());
  for (std::size_t r = 0; r < embed_rows.size(); ++r) {
    out.row(embed_rows[r]) = embed_grad.row(static_cast<Index>(r));
  }
  return out;
}

namespace {

template <typename M>
void fill_gaussian(M& m, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
}

Linear make_linear(Index in, Index out, std::mt19937_64& rng) {
  Linear layer{Matrix(out, in), Vector::Zero(out)};
  fill_gaussian(layer.weight, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  return layer;
}

void check_dims(const ModelDims& d) {
  if (d.features < 1 || d.embed < 1 || d.hidden1 < 1 || d.hidden2 < 1 ||
      d.output < 1) {
    throw DimensionError("model dimensions must all be >= 1");
  }
}

}  // namespace

ModelParams init_model(std::uint64_t seed, const ModelDims& dims) {
  check_dims(dims);
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.embed_table.resize(dims.features, dims.embed);
  fill_gaussian(p.embed_table, 1.0, rng);
  p.layer1 = make_linear(dims.embed, dims.hidden1, rng);
  p.layer2 = make_linear(dims.hidden1, dims.hidden2, rng);
  p.layer3 = make_linear(dims.hidden2, dims.output, rng);
  return p;
}

ClassEmbeddingMatrix init_class_embeddings(std::uint64_t seed, Index classes,
                                           Index dim) {
  if (classes < 2 || dim < 2) {
    throw RangeError("init_class_embeddings: need C >= 2 and D >= 2");
  }
  std::mt19937_64 rng(seed);
  Matrix w(classes, dim);
  // Row-by-row draw so the matrix does not depend on Eigen's storage order.
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index r = 0; r < classes; ++r) {
    for (Index c = 0; c < dim; ++c) w(r, c) = normal(rng);
  }
  return normalize_rows(w);
}

std::pair<Matrix, ForwardCache> forward(const ModelParams& params,
                                        const SparseBatch& batch) {
  if (batch.rows() != params.embed_table.rows()) {
    throw DimensionError("forward: feature dimension " +
                         std::to_string(batch.rows()) + " but model has " +
                         std::to_string(params.embed_table.rows()));
  }
  ForwardCache c;
  c.batch_size = batch.cols();
  c.features = batch.rows();
  for (Index b = 0; b < batch.cols(); ++b) {
    bool active = false;
    for (SparseBatch::InnerIterator it(batch, b); it; ++it) {
      if (it.value() != 0.0) {
        active = true;
        break;
      }
    }
    if (!active) {
      throw DegenerateInputError("forward: instance has no active features");
    }
  }

  c.embedded = params.embed_table.transpose() * batch;
  c.pre1 = (params.layer1.weight * c.embedded).colwise() + params.layer1.bias;
  c.post1 = c.pre1.cwiseMax(0.0);
  c.pre2 = (params.layer2.weight * c.post1).colwise() + params.layer2.bias;
  c.post2 = c.pre2.cwiseMax(0.0);
  c.raw_output =
      (params.layer3.weight * c.post2).colwise() + params.layer3.bias;
  c.raw_norm = c.raw_output.colwise().norm().transpose();
  for (Index b = 0; b < c.raw_norm.size(); ++b) {
    if (!(c.raw_norm[b] > 0)) {
      throw DegenerateInputError(
          "forward: zero embedding before normalization");
    }
  }
  c.output = c.raw_output * c.raw_norm.cwiseInverse().asDiagonal();
  Matrix out = c.output;
  return {std::move(out), std::move(c)};
}

std::pair<Vector, ForwardCache> forward(const ModelParams& params,
                                        const SparseVector& x) {
  auto [out, cache] = forward(params, make_batch({&x}));
  Vector emb = out.col(0);
  return {std::move(emb), std::move(cache)};
}

ModelGrads backward(const ModelParams& params, const SparseBatch& batch,
                    const ForwardCache& cache, const Matrix& grad_out) {
  const ModelDims d = params.dims();
  if (cache.batch_size != batch.cols() || cache.features != batch.rows() ||
      cache.embedded.rows() != d.embed || cache.pre1.rows() != d.hidden1 ||
      cache.pre2.rows() != d.hidden2 || cache.output.rows() != d.output) {
    throw DimensionError("backward: cache does not match params and batch");
  }
  if (grad_out.rows() != d.output || grad_out.cols() != batch.cols()) {
    throw DimensionError("backward: grad_out has wrong shape");
  }

  ModelGrads g;
  // Jacobian of v / |v| is (I - e e^T) / |v|.
  const Matrix& e = cache.output;
  const Vector along = (e.cwiseProduct(grad_out)).colwise().sum().transpose();
  Matrix grad_raw = grad_out - e * along.asDiagonal();
  grad_raw = grad_raw * cache.raw_norm.cwiseInverse().asDiagonal();

  g.layer3.weight = grad_raw * cache.post2.transpose();
  g.layer3.bias = grad_raw.rowwise().sum();
  Matrix grad2 = params.layer3.weight.transpose() * grad_raw;
  grad2 = grad2.cwiseProduct((cache.pre2.array() > 0).cast<double>().matrix());

  g.layer2.weight = grad2 * cache.post1.transpose();
  g.layer2.bias = grad2.rowwise().sum();
  Matrix grad1 = params.layer2.weight.transpose() * grad2;
  grad1 = grad1.cwiseProduct((cache.pre1.array() > 0).cast<double>().matrix());

  g.layer1.weight = grad1 * cache.embedded.transpose();
  g.layer1.bias = grad1.rowwise().sum();
  const Matrix grad_embedded = params.layer1.weight.transpose() * grad1;

  for (Index b = 0; b < batch.cols(); ++b) {
    for (SparseBatch::InnerIterator it(batch, b); it; ++it) {
      g.embed_rows.push_back(it.index());
    }
  }
  std::sort(g.embed_rows.begin(), g.embed_rows.end());
  g.embed_rows.erase(std::unique(g.embed_rows.begin(), g.embed_rows.end()),
                     g.embed_rows.end());
  g.embed_grad =
      RowMajorMatrix::Zero(static_cast<Index>(g.embed_rows.size()), d.embed);
  for (Index b = 0; b < batch.cols(); ++b) {
    for (SparseBatch::InnerIterator it(batch, b); it; ++it) {
      const auto slot = std::lower_bound(g.embed_rows.begin(),
                                         g.embed_rows.end(), it.index()) -
                        g.embed_rows.begin();
      g.embed_grad.row(slot) += it.value() * grad_embedded.col(b).transpose();
    }
  }
  return g;
}

ModelGrads backward(const ModelParams& params, const SparseVector& x,
                    const ForwardCache& cache, const Vector& grad_out) {
  return backward(params, make_batch({&x}), cache, Matrix(grad_out));
}

void apply_sgd(ModelParams& params, const ModelGrads& grads, double lr) {
  for (std::size_t r = 0; r < grads.embed_rows.size(); ++r) {
    params.embed_table.row(grads.embed_rows[r]) -=
        lr * grads.embed_grad.row(static_cast<Index>(r));
  }
  auto step = [lr](Linear& p, const Linear& g) {
    p.weight -= lr * g.weight;
    p.bias -= lr * g.bias;
  };
  step(params.layer1, grads.layer1);
  step(params.layer2, grads.layer2);
  step(params.layer3, grads.layer3);
}

Vector predict_scores(const ClassEmbeddingMatrix& classes, const Vector& emb) {
  if (classes.cols() != emb.size()) {
    throw DimensionError("predict_scores: embedding has dimension " +
                         std::to_string(emb.size()) + ", classes have " +
                         std::to_string(classes.cols()));
  }
  return classes * emb;
}

std::vector<Index> top_k_labels(const Vector& scores, Index k) {
  if (k < 1 || k > scores.size()) {
    throw RangeError("top_k_labels: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(scores.size()) + "]");
  }
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  auto better = [&](Index a, Index b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
  order.resize(static_cast<std::size_t>(k));
  return order;
}

namespace {

constexpr std::array<char, 8> kCheckpointMagic = {'F', 'E', 'D', 'A',
                                                  'L', 'C', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParseError("checkpoint truncated", 0);
  return value;
}

template <typename M>
void put_matrix(std::ostream& out, const M& m) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
  }
}

template <typename M>
M get_matrix(std::istream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows > (1ull << 32) || cols > (1ull << 32)) {
    throw ParseError("checkpoint matrix shape is implausible", 0);
  }
  M m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in);
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const ModelParams& params,
                     const ClassEmbeddingMatrix& classes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, 8);
  put_matrix(out, params.embed_table);
  for (const Linear* l : {&params.layer1, &params.layer2, &params.layer3}) {
    put_matrix(out, l->weight);
    put_matrix(out, Matrix(l->bias));
  }
  put_matrix(out, classes);
  if (!out) throw Error("failed writing " + path.string());
}

std::pair<ModelParams, ClassEmbeddingMatrix> load_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kCheckpointMagic) {
    throw ParseError("not a fedalc checkpoint: " + path.string(), 0);
  }
  if (get<std::uint32_t>(in) != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version", 0);
  }
  if (get<std::uint32_t>(in) != 8) {
    throw ParseError("unexpected checkpoint matrix count", 0);
  }
  ModelParams p;
  p.embed_table = get_matrix<RowMajorMatrix>(in);
  for (Linear* l : {&p.layer1, &p.layer2, &p.layer3}) {
    l->weight = get_matrix<Matrix>(in);
    Matrix bias = get_matrix<Matrix>(in);
    if (bias.cols() != 1 || bias.rows() != l->weight.rows()) {
      throw ParseError("checkpoint bias shape mismatch", 0);
    }
    l->bias = bias.col(0);
  }
  if (p.layer1.in() != p.embed_table.cols() ||
      p.layer2.in() != p.layer1.out() || p.layer3.in() != p.layer2.out()) {
    throw ParseError("checkpoint layer shapes are inconsistent", 0);
  }
  Matrix classes = get_matrix<Matrix>(in);
  return {std::move(p), std::move(classes)};
}

std::uint64_t checksum(const Matrix& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const std::int64_t shape[2] = {m.rows(), m.cols()};
  mix(shape, sizeof(shape));
  mix(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  return h;
}

}  // namespace fedalc
