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

#ifndef FEDALC_LOSSES_HPP_
#define FEDALC_LOSSES_HPP_

#include <map>
#include <optional>
#include <vector>

#include "fedalc/labelsets.hpp"
#include "fedalc/model.hpp"
#include "fedalc/numeric.hpp"

namespace fedalc {

struct HyperParams {
  double alpha = 1.0;
  double beta = 1.0;
  double nu = 0.9;          // hinge margin on cosine distance
  double lambda = 1.0;      // weight of the server-side regularizer
  double margin_pos = 0.9;  // required instance/class dot product
  Index k_mine = 5;         // neighbors used by the mined regularizers
};

// Throws RangeError naming the first violated constraint.
void validate(const HyperParams& hp);

using RowGradients = std::map<Index, Vector>;

struct LossResult {
  double value = 0.0;
  std::optional<Vector> grad_embedding;
  RowGradients grad_rows;

  // C x D matrix holding grad_rows; absent rows are zero.
  Matrix dense_row_gradient(Index classes, Index dim) const;
};

enum class SigmaMode { kRaw, kNormalized };

// max(0, margin - emb.w)^2. grad_rows holds a single entry, key 0, with the
// gradient with respect to w_y.
LossResult positive_loss(const Vector& emb, const Vector& w_y,
                         double margin_pos);

// Mean of positive_loss over the columns of `embeddings`, with gradients of
// that mean.
struct BatchPositiveLoss {
  double value = 0.0;
  Matrix grad_embeddings;  // D x B
  Vector grad_class;       // D
};
BatchPositiveLoss positive_loss_batch(const Matrix& embeddings,
                                      const Vector& w_y, double margin_pos);

// alpha d(emb, w_y)^2 + beta sum_{c != y} max(0, nu - d(emb, w_c))^2
LossResult contrastive_loss(const Vector& emb, Index y,
                            const ClassEmbeddingMatrix& classes,
                            const HyperParams& hp);

// sum_u sum_{v != u} max(0, nu - d(w_u, w_v))^2
LossResult spreadout_reg(const ClassEmbeddingMatrix& classes, double nu);

// The k classes closest to each class (excluding itself), nearest first;
// equal distances go to the lower index.
std::vector<std::vector<Index>> nearest_classes(
    const ClassEmbeddingMatrix& classes, Index k);

// sum_u sum_{v in N_k(u)} -d(w_u, w_v)^2
LossResult spreadout_reg_topk(const ClassEmbeddingMatrix& classes, Index k);

// sum_u sum_{v != u} sigma(u, v) max(0, nu - d(w_u, w_v))^2, with sigma
// replaced by its row-normalized form in kNormalized mode.
LossResult correlation_reg(const ClassEmbeddingMatrix& classes,
                           const SigmaWeights& sigma, double nu,
                           SigmaMode mode = SigmaMode::kRaw);

// correlation_reg with the inner sum restricted to N_k(u).
LossResult correlation_reg_topk(const ClassEmbeddingMatrix& classes,
                                const SigmaWeights& sigma, Index k, double nu,
                                SigmaMode mode = SigmaMode::kRaw);

// (1/n) sum_j [ alpha sum_{y != y' in P_j} d(w_y, w_y')^2
//             + beta sum_{y in P_j, y' not in P_j} max(0, nu - d(w_y, w_y'))^2
//             ]
LossResult fixed_embedding_reg(const ClassEmbeddingMatrix& classes,
                               const LabelSetTable& labels,
                               const HyperParams& hp);

// gamma(u, v) = sigma(u, v) / sum_{w != u} sigma(u, w); zero rows stay zero.
SigmaWeights normalize_weights(const SigmaWeights& sigma);

}  // namespace fedalc

#endif  // FEDALC_LOSSES_HPP_
