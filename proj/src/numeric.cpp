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

#include "fedalc/numeric.hpp"

#include <algorithm>

namespace fedalc {

SparseVector make_sparse(Index dim,
                         std::vector<std::pair<Index, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector out(dim);
  out.reserve(static_cast<Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto [index, value] = entries[i];
    if (index < 0 || index >= dim) {
      throw RangeError("make_sparse: index " + std::to_string(index) +
                       " outside [0, " + std::to_string(dim) + ")");
    }
    if (i > 0 && entries[i - 1].first == index) {
      throw RangeError("make_sparse: duplicate index " + std::to_string(index));
    }
    if (!std::isfinite(value)) {
      throw RangeError("make_sparse: non-finite value at index " +
                       std::to_string(index));
    }
    if (value != 0.0) out.insertBack(index) = value;
  }
  return out;
}

SparseBatch make_batch(const std::vector<const SparseVector*>& columns) {
  if (columns.empty()) return SparseBatch();
  const Index rows = columns.front()->size();
  Index nnz = 0;
  for (const auto* c : columns) {
    if (c->size() != rows) {
      throw DimensionError("make_batch: instances have differing dimensions");
    }
    nnz += c->nonZeros();
  }
  SparseBatch batch(rows, static_cast<Index>(columns.size()));
  batch.reserve(nnz);
  for (Index col = 0; col < batch.cols(); ++col) {
    batch.startVec(col);
    for (SparseVector::InnerIterator it(*columns[col]); it; ++it) {
      batch.insertBack(it.index(), col) = it.value();
    }
  }
  batch.finalize();
  return batch;
}

}  // namespace fedalc
