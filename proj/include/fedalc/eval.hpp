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

#ifndef FEDALC_EVAL_HPP_
#define FEDALC_EVAL_HPP_

#include <vector>

#include "fedalc/numeric.hpp"

namespace fedalc {

// Row i holds the C class scores of instance i; truth[i] its positive labels.
struct PredictionBatch {
  Matrix scores;
  std::vector<std::vector<Label>> truth;

  Index size() const { return scores.rows(); }
  Index classes() const { return scores.cols(); }
};

// Mean over instances of |top_k(scores) intersect truth| / k, with top-k
// ties resolved toward the lower label index.
double precision_at_k(const PredictionBatch& batch, Index k);

enum class MapVariant {
  // Per class, rank instances by that class's score and average precision at
  // each positive; mean over classes that have positives.
  kMacroOverClasses,
  // Per instance, rank labels by score; mean over instances.
  kMeanOverInstances,
};

// Instances tied on score are ranked by lower index first.
double mean_average_precision(
    const PredictionBatch& batch,
    MapVariant variant = MapVariant::kMacroOverClasses);

}  // namespace fedalc

#endif  // FEDALC_EVAL_HPP_
