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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fedalc/losses.hpp"
#include "support.hpp"
#include "verify/oracles.hpp"
#include "verify/suites.hpp"

using namespace fedalc;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix random_sigma(test::Rng& rng, Index c) {
  Matrix s(c, c);
  for (Index u = 0; u < c; ++u) {
    for (Index v = 0; v < c; ++v) s(u, v) = u == v ? 0.0 : rng.uniform(0, 1);
  }
  return s;
}

LabelSetTable table_of(const std::vector<std::vector<Label>>& sets,
                       Index classes) {
  LabelSetTable t;
  t.num_labels = classes;
  for (std::size_t j = 0; j < sets.size(); ++j) {
    LabelSetEntry e;
    // Big-endian index bytes keep the entries sorted by key.
    e.key[0] = static_cast<std::uint8_t>(j >> 8);
    e.key[1] = static_cast<std::uint8_t>(j);
    e.positives = sets[j];
    t.entries.push_back(std::move(e));
  }
  return t;
}

bool has_zero_gradients(const LossResult& r) {
  if (r.grad_embedding && !r.grad_embedding->isZero()) return false;
  return std::all_of(r.grad_rows.begin(), r.grad_rows.end(),
                     [](const auto& kv) { return kv.second.isZero(); });
}

}  // namespace

TEST_CASE("validate hyperparameters") {
  CHECK_NOTHROW(validate(HyperParams{}));
  HyperParams hp;
  hp.nu = 0;
  CHECK_THROWS_AS(validate(hp), RangeError);
  hp = {};
  hp.margin_pos = 1.5;
  CHECK_THROWS_AS(validate(hp), RangeError);
  hp = {};
  hp.k_mine = 0;
  CHECK_THROWS_AS(validate(hp), RangeError);
}

TEST_CASE("positive_loss examples") {
  const Vector w = vec({1, 0});
  const LossResult boundary =
      positive_loss(vec({0.9, std::sqrt(0.19)}), w, 0.9);
  CHECK(boundary.value == doctest::Approx(0.0).epsilon(1e-15));

  const LossResult satisfied = positive_loss(vec({1, 0}), w, 0.9);
  CHECK(satisfied.value == 0.0);
  CHECK(has_zero_gradients(satisfied));

  const LossResult active = positive_loss(vec({-0.1, std::sqrt(0.99)}), w, 0.9);
  CHECK(active.value == doctest::Approx(1.0).epsilon(1e-14));
  // d/d emb of (m - e.w)^2 is -2 (m - e.w) w.
  CHECK(active.grad_embedding->isApprox(vec({-2.0, 0.0}), 1e-14));
  CHECK(active.grad_rows.at(0).isApprox(-2.0 * vec({-0.1, std::sqrt(0.99)}),
                                        1e-14));
}

TEST_CASE("positive_loss_batch is the mean of per-column losses") {
  test::Rng rng(31);
  const Matrix e = rng.unit_rows(6, 4).transpose();
  const Vector w = rng.unit(4);
  const auto batch = positive_loss_batch(e, w, 0.9);
  double sum = 0;
  Vector gclass = Vector::Zero(4);
  for (Index b = 0; b < 6; ++b) {
    const LossResult r = positive_loss(e.col(b), w, 0.9);
    sum += r.value;
    gclass += r.grad_rows.at(0);
    CHECK(
        batch.grad_embeddings.col(b).isApprox(*r.grad_embedding / 6.0, 1e-13));
  }
  CHECK(batch.value == doctest::Approx(sum / 6.0).epsilon(1e-14));
  CHECK(batch.grad_class.isApprox(gclass / 6.0, 1e-13));
}

TEST_CASE("contrastive_loss examples") {
  test::Rng rng(32);
  const Matrix w = rng.unit_rows(3, 4);
  const Vector e = rng.unit(4);
  HyperParams hp;
  hp.beta = 0;
  const double d = 1.0 - e.dot(w.row(1).transpose());
  CHECK(contrastive_loss(e, 1, w, hp).value ==
        doctest::Approx(hp.alpha * d * d).epsilon(1e-14));

  // Negatives antipodal to the instance sit at distance 2 >= nu.
  Matrix far(3, 2);
  far << 1, 0, -1, 0, -1, 0;
  hp = {};
  hp.alpha = 0;
  CHECK(contrastive_loss(vec({1, 0}), 0, far, hp).value == 0.0);

  hp = {};
  CHECK(contrastive_loss(e, 2, w, hp).value ==
        doctest::Approx(oracle::contrastive_loss(oracle::to_std(e), 2,
                                                 oracle::to_rows(w), hp))
            .epsilon(1e-13));
  CHECK_THROWS_AS(contrastive_loss(e, 3, w, hp), RangeError);
}

TEST_CASE("spreadout_reg examples") {
  CHECK(spreadout_reg(Matrix::Identity(3, 3), 0.9).value == 0.0);
  Matrix same(2, 2);
  same << 1, 0, 1, 0;
  CHECK(spreadout_reg(same, 1.0).value == doctest::Approx(2.0));
}

TEST_CASE("spreadout_reg_topk examples") {
  Matrix anti(2, 2);
  anti << 1, 0, -1, 0;
  CHECK(spreadout_reg_topk(anti, 1).value == doctest::Approx(-8.0));

  test::Rng rng(33);
  const Matrix w = rng.unit_rows(5, 3);
  const Matrix g = w * w.transpose();
  double all = 0;
  for (Index u = 0; u < 5; ++u) {
    for (Index v = 0; v < 5; ++v) {
      if (u != v) all -= (1 - g(u, v)) * (1 - g(u, v));
    }
  }
  CHECK(spreadout_reg_topk(w, 4).value == doctest::Approx(all).epsilon(1e-13));
  CHECK_THROWS_AS(spreadout_reg_topk(w, 5), RangeError);
}

TEST_CASE("correlation_reg examples") {
  test::Rng rng(34);
  const Matrix w = rng.unit_rows(4, 3);
  const LossResult uniform =
      correlation_reg(w, SigmaWeights::uniform(4, 1.0), 0.9);
  CHECK(std::abs(uniform.value - spreadout_reg(w, 0.9).value) <= 1e-12);

  const LossResult zero =
      correlation_reg(w, SigmaWeights::uniform(4, 0.0), 0.9);
  CHECK(zero.value == 0.0);
  CHECK(has_zero_gradients(zero));

  const Matrix s = random_sigma(rng, 4);
  CHECK(correlation_reg(w, SigmaWeights::from_dense(s), 0.9).value ==
        doctest::Approx(
            oracle::correlation(oracle::to_rows(w), oracle::to_rows(s), 0.9))
            .epsilon(1e-13));
  CHECK_THROWS_AS(correlation_reg(w, SigmaWeights::uniform(3, 1.0), 0.9),
                  DimensionError);
}

TEST_CASE("correlation_reg_topk examples") {
  test::Rng rng(35);
  const Matrix w = rng.unit_rows(6, 3);
  const SigmaWeights s = SigmaWeights::from_dense(random_sigma(rng, 6));
  CHECK(std::abs(correlation_reg_topk(w, s, 5, 0.9).value -
                 correlation_reg(w, s, 0.9).value) <= 1e-12);

  // Uniform weights give the hinge spreadout restricted to N_k(u).
  const auto nearest = nearest_classes(w, 2);
  double hinge = 0;
  for (Index u = 0; u < 6; ++u) {
    for (Index v : nearest[u]) {
      const double d = 1 - w.row(u).dot(w.row(v));
      hinge += std::pow(std::max(0.0, 0.9 - d), 2);
    }
  }
  CHECK(correlation_reg_topk(w, SigmaWeights::uniform(6, 1.0), 2, 0.9).value ==
        doctest::Approx(hinge).epsilon(1e-13));

  CHECK(correlation_reg_topk(w, s, 2, 0.9).value ==
        doctest::Approx(oracle::correlation_topk(oracle::to_rows(w),
                                                 oracle::to_rows(s.to_dense()),
                                                 2, 0.9))
            .epsilon(1e-13));
}

TEST_CASE("fixed_embedding_reg examples") {
  test::Rng rng(36);
  const Matrix w = rng.unit_rows(4, 3);
  HyperParams hp;
  hp.beta = 0;
  CHECK(fixed_embedding_reg(w, table_of({{0}, {1}, {3}}, 4), hp).value == 0.0);

  Matrix coincident(3, 2);
  coincident << 1, 0, 1, 0, 0, 1;
  CHECK(fixed_embedding_reg(coincident, table_of({{0, 1}}, 3), hp).value ==
        doctest::Approx(0.0));

  hp = {};
  const Matrix w5 = rng.unit_rows(5, 3);
  const std::vector<std::vector<Label>> sets{{0, 2}, {1}, {2, 3, 4}};
  CHECK(fixed_embedding_reg(w5, table_of(sets, 5), hp).value ==
        doctest::Approx(oracle::fixed_embedding(oracle::to_rows(w5), sets, hp))
            .epsilon(1e-13));
  CHECK_THROWS_AS(fixed_embedding_reg(w5, table_of(sets, 6), hp),
                  DimensionError);
}

TEST_CASE("normalize_weights examples") {
  Matrix s(3, 3);
  s << 0, 2, 2, 0, 0, 0, 1, 3, 0;
  const SigmaWeights g = normalize_weights(SigmaWeights::from_dense(s));
  CHECK(g(0, 1) == 0.5);
  CHECK(g(0, 2) == 0.5);
  CHECK(g.row(1).isZero());
  CHECK(g(2, 0) == 0.25);
  CHECK(g(2, 1) == 0.75);
}

TEST_CASE("nearest_classes ordering and ties") {
  Matrix w(4, 2);
  // Rows 1 and 3 are equally far from row 0.
  w << 1, 0, 0, 1, -1, 0, 0, -1;
  const auto n = nearest_classes(w, 2);
  CHECK(n[0] == std::vector<Index>{1, 3});
  CHECK(n[2] == std::vector<Index>{1, 3});
  CHECK_THROWS_AS(nearest_classes(w, 4), RangeError);
}

TEST_CASE("property: neighbor sets equal the brute-force k nearest") {
  test::Rng rng(37);
  for (int it = 0; it < 200; ++it) {
    const Index c = rng.integer(2, 10);
    const Index k = rng.integer(1, c - 1);
    const Matrix w = rng.unit_rows(c, rng.integer(2, 6));
    const auto got = nearest_classes(w, k);
    const auto want =
        oracle::neighbors(oracle::to_rows(w), static_cast<std::size_t>(k));
    for (Index u = 0; u < c; ++u) {
      std::vector<Index> expected(want[u].begin(), want[u].end());
      CHECK(got[u] == expected);
    }
  }
}

TEST_CASE("property: sign and linearity of the regularizers") {
  test::Rng rng(38);
  for (int it = 0; it < 100; ++it) {
    const Index c = rng.integer(2, 8);
    const Matrix w = rng.unit_rows(c, rng.integer(2, 8));
    const Index k = rng.integer(1, c - 1);
    const double nu = rng.uniform(0.1, 2.0);
    const SigmaWeights s = SigmaWeights::from_dense(random_sigma(rng, c));
    const double factor = rng.uniform(0, 4);

    CHECK(spreadout_reg(w, nu).value >= 0);
    CHECK(spreadout_reg_topk(w, k).value <= 0);
    const double base = correlation_reg(w, s, nu).value;
    CHECK(base >= 0);
    CHECK(correlation_reg(w, s.scaled(factor), nu).value ==
          doctest::Approx(factor * base).epsilon(1e-12));
    CHECK(correlation_reg_topk(w, s, k, nu).value >= 0);
    CHECK(correlation_reg(w, s, nu, SigmaMode::kNormalized).value >= 0);

    HyperParams hp;
    hp.nu = nu;
    const Vector e = rng.unit(w.cols());
    CHECK(contrastive_loss(e, rng.integer(0, c - 1), w, hp).value >= 0);
    CHECK(positive_loss(e, w.row(0).transpose(), 0.9).value >= 0);
  }
}

TEST_CASE("property: normalized rows sum to one") {
  test::Rng rng(39);
  for (int it = 0; it < 200; ++it) {
    const Index c = rng.integer(2, 12);
    Matrix s = random_sigma(rng, c);
    if (rng.coin(0.3)) s.row(rng.integer(0, c - 1)).setZero();
    const Vector sums =
        normalize_weights(SigmaWeights::from_dense(s)).row_sums();
    for (Index u = 0; u < c; ++u) {
      if (s.row(u).sum() == 0) {
        CHECK(sums[u] == 0.0);
      } else {
        CHECK(std::abs(sums[u] - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("gradient oracle suite") {
  const auto r = verify::gradient_suite(401, 50);
  for (const auto& line : r.details) MESSAGE(line);
  CHECK(r.passed);
}

TEST_CASE("equivalence suite") {
  const auto r = verify::equivalence_suite(402, 50);
  for (const auto& line : r.details) MESSAGE(line);
  CHECK(r.passed);
}
