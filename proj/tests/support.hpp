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

#ifndef FEDALC_TESTS_SUPPORT_HPP_
#define FEDALC_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "fedalc/numeric.hpp"

namespace fedalc::test {

// Seeded generator for property tests. Every test fixes its own seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Index integer(Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(engine_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>()(engine_); }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }

  Vector gaussian(Index d) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v[i] = normal();
    return v;
  }
  Vector unit(Index d) {
    Vector v = gaussian(d);
    while (v.norm() < 1e-3) v = gaussian(d);
    return v.normalized();
  }
  Matrix unit_rows(Index c, Index d) {
    Matrix m(c, d);
    for (Index u = 0; u < c; ++u) m.row(u) = unit(d).transpose();
    return m;
  }
  SparseVector sparse(Index dim, Index active) {
    std::vector<Index> idx(static_cast<std::size_t>(dim));
    for (Index i = 0; i < dim; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), engine_);
    std::vector<std::pair<Index, double>> entries;
    for (Index i = 0; i < active; ++i) {
      double v = normal();
      while (v == 0.0) v = normal();
      entries.emplace_back(idx[i], v);
    }
    return make_sparse(dim, entries);
  }
  std::vector<Label> label_set(Index c, double p = 0.35) {
    std::vector<Label> out;
    while (out.empty()) {
      for (Index u = 0; u < c; ++u) {
        if (coin(p)) out.push_back(static_cast<Label>(u));
      }
    }
    return out;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fedalc::test

#endif  // FEDALC_TESTS_SUPPORT_HPP_
