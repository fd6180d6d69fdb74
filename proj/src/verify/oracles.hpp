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

#ifndef FEDALC_VERIFY_ORACLES_HPP_
#define FEDALC_VERIFY_ORACLES_HPP_

// Brute-force re-implementations used to check the library. They work on
// plain nested std::vector data with scalar loops and share no code path with
// the Eigen-based implementations they are compared against.

#include <functional>
#include <vector>

#include "fedalc/losses.hpp"
#include "fedalc/model.hpp"

namespace fedalc::oracle {

using Rows = std::vector<std::vector<double>>;
using LabelSets = std::vector<std::vector<Label>>;

Rows to_rows(const Matrix& m);
std::vector<double> to_std(const Vector& v);

double distance(const std::vector<double>& a, const std::vector<double>& b);

double positive_loss(const std::vector<double>& emb,
                     const std::vector<double>& w, double margin);
double contrastive_loss(const std::vector<double>& emb, std::size_t y,
                        const Rows& w, const HyperParams& hp);
double spreadout(const Rows& w, double nu);

// Neighbors of u from a full sort of (distance, index) over all other rows.
std::vector<std::vector<std::size_t>> neighbors(const Rows& w, std::size_t k);

double spreadout_topk(const Rows& w, std::size_t k);
double correlation(const Rows& w, const Rows& sigma, double nu);
double correlation_topk(const Rows& w, const Rows& sigma, std::size_t k,
                        double nu);
double fixed_embedding(const Rows& w, const LabelSets& positives,
                       const HyperParams& hp);

// sigma(u, v) = (1/n) * #{j : u in P_j, v not in P_j}, counted by a double
// loop over instances and ordered label pairs.
Rows sigma(const LabelSets& positives, std::size_t classes);
Rows normalize(const Rows& sigma);

// Precision@k where the predicted set is found by counting, for each label,
// how many labels outrank it.
double precision_at_k(const Rows& scores, const LabelSets& truth,
                      std::size_t k);
// AP per class from explicit rank positions; macro mean over classes with
// positives.
double mean_average_precision_macro(const Rows& scores, const LabelSets& truth);
double mean_average_precision_instances(const Rows& scores,
                                        const LabelSets& truth);

// Scalar output of the embedding network, computed with explicit loops:
// sum_b probe[b] . g(x_b).
double network_probe(const ModelParams& params,
                     const std::vector<SparseVector>& xs, const Rows& probe);

// |a - f| / max(|a|, |f|, floor) in the Euclidean norm.
double relative_error(const Vector& analytic, const Vector& numeric,
                      double floor = 1e-6);

Vector central_difference(const std::function<double(const Vector&)>& f,
                          const Vector& x, double eps);

}  // namespace fedalc::oracle

#endif  // FEDALC_VERIFY_ORACLES_HPP_
