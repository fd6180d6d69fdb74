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

#ifndef FEDALC_NUMERIC_HPP_
#define FEDALC_NUMERIC_HPP_

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "fedalc/error.hpp"

namespace fedalc {

using Index = Eigen::Index;
using Label = std::uint32_t;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Sparse feature vector; size() is the feature dimension F.
using SparseVector = Eigen::SparseVector<double>;

// Columns are instances; rows are features.
using SparseBatch = Eigen::SparseMatrix<double>;

inline constexpr double kUnitNormTolerance = 1e-6;

namespace detail {

template <typename A, typename B>
void require_same_size(const Eigen::MatrixBase<A>& a,
                       const Eigen::MatrixBase<B>& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": length mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
}

}  // namespace detail

template <typename A, typename B>
typename A::Scalar dot(const Eigen::MatrixBase<A>& a,
                       const Eigen::MatrixBase<B>& b) {
  detail::require_same_size(a, b, "dot");
  return a.dot(b);
}

template <typename A>
typename A::PlainObject l2_normalize(const Eigen::MatrixBase<A>& v) {
  const auto norm = v.norm();
  if (!(norm > 0)) throw DegenerateInputError("l2_normalize: zero vector");
  return v / norm;
}

template <typename A>
bool is_unit(const Eigen::MatrixBase<A>& v,
             double tolerance = kUnitNormTolerance) {
  return std::abs(v.norm() - 1.0) <= tolerance;
}

// d(x, y) = 1 - x.y for unit vectors; lies in [0, 2].
template <typename A, typename B>
typename A::Scalar cosine_distance(const Eigen::MatrixBase<A>& x,
                                   const Eigen::MatrixBase<B>& y) {
  assert(is_unit(x) && is_unit(y));
  return typename A::Scalar(1) - dot(x, y);
}

template <typename A, typename B>
typename A::PlainObject sgd_step(const Eigen::MatrixBase<A>& param,
                                 const Eigen::MatrixBase<B>& grad, double lr) {
  detail::require_same_size(param, grad, "sgd_step");
  if (lr < 0 || !std::isfinite(lr)) {
    throw RangeError("sgd_step: learning rate must be finite and >= 0");
  }
  return param - lr * grad;
}

// Central differences, one coordinate at a time.
template <typename F>
Vector finite_diff_grad(F&& f, const Vector& x, double eps) {
  if (!(eps > 0)) throw RangeError("finite_diff_grad: eps must be > 0");
  Vector grad(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double up = f(probe);
    probe[i] = saved - eps;
    const double down = f(probe);
    probe[i] = saved;
    grad[i] = (up - down) / (2 * eps);
  }
  return grad;
}

// Rows of `m` scaled to unit length. Throws on a zero row.
template <typename A>
typename A::PlainObject normalize_rows(const Eigen::MatrixBase<A>& m) {
  typename A::PlainObject out = m;
  for (Index r = 0; r < out.rows(); ++r) {
    const auto n = out.row(r).norm();
    if (!(n > 0)) {
      throw DegenerateInputError("normalize_rows: row " + std::to_string(r) +
                                 " is zero");
    }
    out.row(r) /= n;
  }
  return out;
}

// Builds a validated sparse vector of dimension `dim`. Entries may arrive in
// any order; explicit zeros are dropped; duplicates and out-of-range indices
// are rejected.
SparseVector make_sparse(Index dim,
                         std::vector<std::pair<Index, double>> entries);

inline SparseVector make_sparse(
    Index dim, std::initializer_list<std::pair<Index, double>> entries) {
  return make_sparse(dim, std::vector<std::pair<Index, double>>(entries));
}

// Packs instances as columns of a sparse F x B matrix.
SparseBatch make_batch(const std::vector<const SparseVector*>& columns);

}  // namespace fedalc

#endif  // FEDALC_NUMERIC_HPP_
