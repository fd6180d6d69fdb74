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

#include "fedalc/losses.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace fedalc {

void validate(const HyperParams& hp) {
  if (!(hp.alpha >= 0)) throw RangeError("alpha must be >= 0");
  if (!(hp.beta >= 0)) throw RangeError("beta must be >= 0");
  if (!(hp.nu > 0 && hp.nu <= 2)) throw RangeError("nu must lie in (0, 2]");
  if (!(hp.lambda >= 0)) throw RangeError("lambda must be >= 0");
  if (!(hp.margin_pos > 0 && hp.margin_pos <= 1)) {
    throw RangeError("margin_pos must lie in (0, 1]");
  }
  if (hp.k_mine < 1) throw RangeError("k_mine must be >= 1");
}

Matrix LossResult::dense_row_gradient(Index classes, Index dim) const {
  Matrix g = Matrix::Zero(classes, dim);
  for (const auto& [row, grad] : grad_rows) g.row(row) = grad.transpose();
  return g;
}

namespace {

// Accumulates per-row gradients densely, then emits only touched rows.
class RowAccumulator {
 public:
  RowAccumulator(Index classes, Index dim)
      : grad_(Matrix::Zero(classes, dim)),
        touched_(static_cast<std::size_t>(classes), false) {}

  template <typename V>
  void add(Index row, const V& g) {
    grad_.row(row) += g.transpose();
    touched_[row] = true;
  }

  RowGradients release() const {
    RowGradients out;
    for (Index r = 0; r < grad_.rows(); ++r) {
      if (touched_[r]) out.emplace(r, grad_.row(r).transpose());
    }
    return out;
  }

 private:
  Matrix grad_;
  std::vector<bool> touched_;
};

void check_classes(const ClassEmbeddingMatrix& w, const char* op) {
  if (w.rows() < 1 || w.cols() < 1) {
    throw DimensionError(std::string(op) + ": empty class embedding matrix");
  }
}

void check_k(Index k, Index classes, const char* op) {
  if (k < 1 || k >= classes) {
    throw RangeError(std::string(op) + ": k=" + std::to_string(k) +
                     " outside [1, C-1] with C=" + std::to_string(classes));
  }
}

// sum over ordered pairs (u, v) listed by `partners` of
// weight(u, v) * max(0, nu - d(w_u, w_v))^2
template <typename Partners>
LossResult weighted_hinge(const ClassEmbeddingMatrix& w, double nu,
                          Partners&& partners) {
  const Index c = w.rows();
  const Matrix gram = w * w.transpose();
  RowAccumulator acc(c, w.cols());
  LossResult out;
  for (Index u = 0; u < c; ++u) {
    partners(u, [&](Index v, double sigma_uv) {
      if (sigma_uv == 0.0) return;
      const double h = nu - (1.0 - gram(u, v));
      if (h <= 0.0) return;
      out.value += sigma_uv * h * h;
      // d/dw_u of h^2 = 2h w_v, and symmetrically for w_v.
      acc.add(u, (2.0 * sigma_uv * h) * w.row(v).transpose());
      acc.add(v, (2.0 * sigma_uv * h) * w.row(u).transpose());
    });
  }
  out.grad_rows = acc.release();
  return out;
}

template <typename Visit>
void all_partners(Index c, Index u, const Vector& row, Visit&& visit) {
  for (Index v = 0; v < c; ++v) {
    if (v != u) visit(v, row[v]);
  }
}

}  // namespace

LossResult positive_loss(const Vector& emb, const Vector& w_y,
                         double margin_pos) {
  const double h = std::max(0.0, margin_pos - dot(emb, w_y));
  LossResult out;
  out.value = h * h;
  out.grad_embedding = -2.0 * h * w_y;
  out.grad_rows.emplace(0, -2.0 * h * emb);
  return out;
}

BatchPositiveLoss positive_loss_batch(const Matrix& embeddings,
                                      const Vector& w_y, double margin_pos) {
  if (embeddings.rows() != w_y.size()) {
    throw DimensionError("positive_loss_batch: dimension mismatch");
  }
  BatchPositiveLoss out;
  const Index b = embeddings.cols();
  if (b == 0) {
    out.grad_embeddings = Matrix::Zero(embeddings.rows(), 0);
    out.grad_class = Vector::Zero(w_y.size());
    return out;
  }
  const Vector hinge = (margin_pos - (embeddings.transpose() * w_y).array())
                           .cwiseMax(0.0)
                           .matrix();
  const double inv_b = 1.0 / static_cast<double>(b);
  out.value = hinge.squaredNorm() * inv_b;
  out.grad_embeddings = w_y * (-2.0 * inv_b * hinge).transpose();
  out.grad_class = embeddings * (-2.0 * inv_b * hinge);
  return out;
}

LossResult contrastive_loss(const Vector& emb, Index y,
                            const ClassEmbeddingMatrix& classes,
                            const HyperParams& hp) {
  check_classes(classes, "contrastive_loss");
  if (classes.cols() != emb.size()) {
    throw DimensionError("contrastive_loss: dimension mismatch");
  }
  if (y < 0 || y >= classes.rows()) {
    throw RangeError("contrastive_loss: class index out of range");
  }
  const Vector sims = classes * emb;
  RowAccumulator acc(classes.rows(), classes.cols());
  LossResult out;
  Vector grad_emb = Vector::Zero(emb.size());

  const double d_pos = 1.0 - sims[y];
  out.value += hp.alpha * d_pos * d_pos;
  grad_emb -= 2.0 * hp.alpha * d_pos * classes.row(y).transpose();
  acc.add(y, -2.0 * hp.alpha * d_pos * emb);

  for (Index c = 0; c < classes.rows(); ++c) {
    if (c == y) continue;
    const double h = hp.nu - (1.0 - sims[c]);
    if (h <= 0.0) continue;
    out.value += hp.beta * h * h;
    grad_emb += 2.0 * hp.beta * h * classes.row(c).transpose();
    acc.add(c, 2.0 * hp.beta * h * emb);
  }
  out.grad_embedding = std::move(grad_emb);
  out.grad_rows = acc.release();
  return out;
}

LossResult spreadout_reg(const ClassEmbeddingMatrix& classes, double nu) {
  check_classes(classes, "spreadout_reg");
  const Index c = classes.rows();
  const Vector ones = Vector::Ones(c);
  return weighted_hinge(classes, nu, [&](Index u, auto&& visit) {
    all_partners(c, u, ones, visit);
  });
}

std::vector<std::vector<Index>> nearest_classes(
    const ClassEmbeddingMatrix& classes, Index k) {
  check_classes(classes, "nearest_classes");
  const Index c = classes.rows();
  check_k(k, c, "nearest_classes");
  const Matrix gram = classes * classes.transpose();
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(c));
  std::vector<Index> order;
  for (Index u = 0; u < c; ++u) {
    order.clear();
    for (Index v = 0; v < c; ++v) {
      if (v != u) order.push_back(v);
    }
    auto closer = [&](Index a, Index b) {
      const double da = 1.0 - gram(u, a);
      const double db = 1.0 - gram(u, b);
      return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
    out[u].assign(order.begin(), order.begin() + k);
  }
  return out;
}

LossResult spreadout_reg_topk(const ClassEmbeddingMatrix& classes, Index k) {
  const auto neighbors = nearest_classes(classes, k);
  const Matrix gram = classes * classes.transpose();
  RowAccumulator acc(classes.rows(), classes.cols());
  LossResult out;
  for (Index u = 0; u < classes.rows(); ++u) {
    for (Index v : neighbors[u]) {
      const double d = 1.0 - gram(u, v);
      out.value -= d * d;
      // d/dw_u of -d^2 = 2d w_v
      acc.add(u, 2.0 * d * classes.row(v).transpose());
      acc.add(v, 2.0 * d * classes.row(u).transpose());
    }
  }
  out.grad_rows = acc.release();
  return out;
}

SigmaWeights normalize_weights(const SigmaWeights& sigma) {
  // gamma(u, v) = count(u, v) / sum_w count(u, w); an all-zero row keeps its
  // divisor and stays zero.
  Vector divisors = sigma.row_totals();
  for (Index u = 0; u < divisors.size(); ++u) {
    if (!(divisors[u] > 0.0)) divisors[u] = sigma.row_divisor()[u];
  }
  return sigma.with_divisors(std::move(divisors));
}

namespace {

const SigmaWeights& select_weights(const SigmaWeights& sigma, SigmaMode mode,
                                   std::optional<SigmaWeights>& storage) {
  if (mode == SigmaMode::kRaw) return sigma;
  storage = normalize_weights(sigma);
  return *storage;
}

}  // namespace

LossResult correlation_reg(const ClassEmbeddingMatrix& classes,
                           const SigmaWeights& sigma, double nu,
                           SigmaMode mode) {
  check_classes(classes, "correlation_reg");
  const Index c = classes.rows();
  if (sigma.size() != c) {
    throw DimensionError(
        "correlation_reg: sigma is " + std::to_string(sigma.size()) + "x" +
        std::to_string(sigma.size()) + " but C=" + std::to_string(c));
  }
  std::optional<SigmaWeights> storage;
  const SigmaWeights& weights = select_weights(sigma, mode, storage);
  return weighted_hinge(classes, nu, [&](Index u, auto&& visit) {
    all_partners(c, u, weights.row(u), visit);
  });
}

LossResult correlation_reg_topk(const ClassEmbeddingMatrix& classes,
                                const SigmaWeights& sigma, Index k, double nu,
                                SigmaMode mode) {
  check_classes(classes, "correlation_reg_topk");
  const Index c = classes.rows();
  if (sigma.size() != c) {
    throw DimensionError("correlation_reg_topk: sigma size does not match C");
  }
  const auto neighbors = nearest_classes(classes, k);
  std::optional<SigmaWeights> storage;
  const SigmaWeights& weights = select_weights(sigma, mode, storage);
  return weighted_hinge(classes, nu, [&](Index u, auto&& visit) {
    for (Index v : neighbors[u]) visit(v, weights(u, v));
  });
}

LossResult fixed_embedding_reg(const ClassEmbeddingMatrix& classes,
                               const LabelSetTable& labels,
                               const HyperParams& hp) {
  check_classes(classes, "fixed_embedding_reg");
  if (labels.empty()) {
    throw DegenerateInputError("fixed_embedding_reg: empty label table");
  }
  if (labels.num_labels != classes.rows()) {
    throw DimensionError("fixed_embedding_reg: label table has C=" +
                         std::to_string(labels.num_labels) +
                         " but the matrix has " +
                         std::to_string(classes.rows()) + " rows");
  }
  // Summed over instances, the negative term is beta * correlation_reg with
  // raw sigma and the positive term weights each ordered pair by its
  // co-occurrence count.
  const auto cooc = label_cooccurrence(labels);
  LossResult out;
  if (hp.beta != 0.0) {
    out = correlation_reg(classes, compute_sigma(labels), hp.nu);
    out.value *= hp.beta;
    for (auto& [row, g] : out.grad_rows) g *= hp.beta;
  }
  if (hp.alpha != 0.0) {
    const double scale = hp.alpha / static_cast<double>(labels.size());
    const Matrix gram = classes * classes.transpose();
    for (Index u = 0; u < cooc.outerSize(); ++u) {
      for (SigmaWeights::SparseRows::InnerIterator it(cooc, u); it; ++it) {
        const Index v = it.col();
        const double weight = scale * it.value();
        const double d = 1.0 - gram(u, v);
        out.value += weight * d * d;
        // d/dw_u of d^2 = -2d w_v
        const Vector gu = -2.0 * weight * d * classes.row(v).transpose();
        const Vector gv = -2.0 * weight * d * classes.row(u).transpose();
        for (auto [row, g] : {std::pair{u, &gu}, std::pair{v, &gv}}) {
          auto [slot, inserted] = out.grad_rows.try_emplace(row, *g);
          if (!inserted) slot->second += *g;
        }
      }
    }
  }
  return out;
}

}  // namespace fedalc
