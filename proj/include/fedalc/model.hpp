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

#ifndef FEDALC_MODEL_HPP_
#define FEDALC_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "fedalc/numeric.hpp"

namespace fedalc {

struct ModelDims {
  Index features = 0;
  Index embed = 512;
  Index hidden1 = 1024;
  Index hidden2 = 1024;
  Index output = 512;

  bool operator==(const ModelDims&) const = default;
};

struct Linear {
  Matrix weight;  // out x in
  Vector bias;    // out

  Index in() const { return weight.cols(); }
  Index out() const { return weight.rows(); }
};

// Sparse embedding table followed by linear+ReLU, linear+ReLU, linear, and a
// final l2 normalization.
struct ModelParams {
  RowMajorMatrix embed_table;  // F x D_emb; row i is feature i's embedding
  Linear layer1;
  Linear layer2;
  Linear layer3;

  ModelDims dims() const;
};

// Row u is the embedding w_u of class u. Rows are kept unit-norm by every
// operation that produces one of these.
using ClassEmbeddingMatrix = Matrix;

// Activations of one forward pass; columns are batch instances.
struct ForwardCache {
  Index batch_size = 0;
  Index features = 0;
  Matrix embedded;  // D_emb x B, sum of value-weighted table rows
  Matrix pre1;      // hidden1 x B
  Matrix post1;
  Matrix pre2;  // hidden2 x B
  Matrix post2;
  Matrix raw_output;  // output x B, before normalization
  Vector raw_norm;    // B
  Matrix output;      // output x B, unit columns
};

// Same layout as ModelParams, except that only touched embedding rows are
// stored: embed_grad.row(r) belongs to feature embed_rows[r].
struct ModelGrads {
  std::vector<Index> embed_rows;  // strictly increasing
  RowMajorMatrix embed_grad;
  Linear layer1;
  Linear layer2;
  Linear layer3;

  // Dense F x D_emb view; rows outside embed_rows are zero.
  RowMajorMatrix dense_embed(Index features) const;
};

ModelParams init_model(std::uint64_t seed, const ModelDims& dims);

ClassEmbeddingMatrix init_class_embeddings(std::uint64_t seed, Index classes,
                                           Index dim);

std::pair<Matrix, ForwardCache> forward(const ModelParams& params,
                                        const SparseBatch& batch);
std::pair<Vector, ForwardCache> forward(const ModelParams& params,
                                        const SparseVector& x);

// Gradient of sum_b grad_out.col(b) . output.col(b) with respect to the
// parameters, given the cache from forward(params, batch).
ModelGrads backward(const ModelParams& params, const SparseBatch& batch,
                    const ForwardCache& cache, const Matrix& grad_out);
ModelGrads backward(const ModelParams& params, const SparseVector& x,
                    const ForwardCache& cache, const Vector& grad_out);

// params <- params - lr * grads
void apply_sgd(ModelParams& params, const ModelGrads& grads, double lr);

// score_u = w_u . emb
Vector predict_scores(const ClassEmbeddingMatrix& classes, const Vector& emb);

// Indices of the k largest scores, descending; ties go to the lower index.
std::vector<Index> top_k_labels(const Vector& scores, Index k);

// Binary checkpoint of the model and class embeddings, layout in
// docs/FORMATS.md.
void save_checkpoint(const std::filesystem::path& path,
                     const ModelParams& params,
                     const ClassEmbeddingMatrix& classes);
std::pair<ModelParams, ClassEmbeddingMatrix> load_checkpoint(
    const std::filesystem::path& path);

// Order-sensitive FNV-1a fingerprint of the raw bytes of a matrix.
std::uint64_t checksum(const Matrix& m);

}  // namespace fedalc

#endif  // FEDALC_MODEL_HPP_
