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

#include "fedalc/eval.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedalc/model.hpp"

namespace fedalc {

namespace {

void check_batch(const PredictionBatch& batch) {
  if (static_cast<Index>(batch.truth.size()) != batch.size()) {
    throw DimensionError(
        "prediction batch: " + std::to_string(batch.truth.size()) +
        " truth sets for " + std::to_string(batch.size()) + " score rows");
  }
  for (const auto& t : batch.truth) {
    if (t.empty()) {
      throw DegenerateInputError("prediction batch: empty true label set");
    }
    for (Label u : t) {
      if (static_cast<Index>(u) >= batch.classes()) {
        throw RangeError("prediction batch: label out of range");
      }
    }
  }
}

// Average precision of a ranked relevance list.
double average_precision(const std::vector<bool>& relevant_in_rank_order) {
  double hits = 0.0, sum = 0.0;
  for (std::size_t r = 0; r < relevant_in_rank_order.size(); ++r) {
    if (!relevant_in_rank_order[r]) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(r + 1);
  }
  return hits > 0 ? sum / hits : 0.0;
}

}  // namespace

double precision_at_k(const PredictionBatch& batch, Index k) {
  check_batch(batch);
  if (k < 1 || k > batch.classes()) {
    throw RangeError("precision_at_k: k=" + std::to_string(k) +
                     " outside [1, C]");
  }
  if (batch.size() == 0) throw DegenerateInputError("precision_at_k: empty");
  double total = 0.0;
  for (Index i = 0; i < batch.size(); ++i) {
    const Vector scores = batch.scores.row(i).transpose();
    const auto top = top_k_labels(scores, k);
    const auto& truth = batch.truth[i];
    Index hits = 0;
    for (Index u : top) {
      if (std::binary_search(truth.begin(), truth.end(),
                             static_cast<Label>(u))) {
        ++hits;
      }
    }
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(batch.size());
}

double mean_average_precision(const PredictionBatch& batch,
                              MapVariant variant) {
  check_batch(batch);
  if (batch.size() == 0) {
    throw DegenerateInputError("mean_average_precision: empty batch");
  }
  const Index n = batch.size();
  const Index c = batch.classes();

  if (variant == MapVariant::kMeanOverInstances) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const auto ranking = top_k_labels(batch.scores.row(i).transpose(), c);
      std::vector<bool> rel(ranking.size());
      for (std::size_t r = 0; r < ranking.size(); ++r) {
        rel[r] =
            std::binary_search(batch.truth[i].begin(), batch.truth[i].end(),
                               static_cast<Label>(ranking[r]));
      }
      total += average_precision(rel);
    }
    return total / static_cast<double>(n);
  }

  std::vector<std::vector<bool>> is_positive(static_cast<std::size_t>(c),
                                             std::vector<bool>(n, false));
  for (Index i = 0; i < n; ++i) {
    for (Label u : batch.truth[i]) is_positive[u][i] = true;
  }
  double total = 0.0;
  Index counted = 0;
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index u = 0; u < c; ++u) {
    if (std::none_of(is_positive[u].begin(), is_positive[u].end(),
                     [](bool b) { return b; })) {
      continue;
    }
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return batch.scores(a, u) > batch.scores(b, u);
    });
    std::vector<bool> rel(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      rel[r] = is_positive[u][order[r]];
    }
    total += average_precision(rel);
    ++counted;
  }
  if (counted == 0) {
    throw DegenerateInputError(
        "mean_average_precision: no class has positives");
  }
  return total / static_cast<double>(counted);
}

}  // namespace fedalc
