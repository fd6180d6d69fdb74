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

#ifndef FEDALC_DATA_HPP_
#define FEDALC_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "fedalc/numeric.hpp"

namespace fedalc {

struct Example {
  SparseVector features;
  std::vector<Label> labels;  // sorted, unique, non-empty
};

struct MultiLabelDataset {
  Index num_features = 0;
  Index num_labels = 0;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// All positives for one class label; one shard per label.
struct ClientShard {
  Label label = 0;
  std::vector<SparseVector> instances;

  bool empty() const { return instances.empty(); }
};

// Extreme-classification repository text format:
//   N F L
//   l1,l2,... idx:val idx:val ...
MultiLabelDataset parse_xmlc(std::istream& in);
MultiLabelDataset load_xmlc(const std::filesystem::path& path);

// Writes the same format; values use the shortest round-tripping decimal.
void write_xmlc(std::ostream& out, const MultiLabelDataset& ds);
void save_xmlc(const std::filesystem::path& path, const MultiLabelDataset& ds);

// Shard u holds every example whose label set contains u. Labels without
// examples yield empty shards.
std::vector<ClientShard> shard_by_label(const MultiLabelDataset& ds);

// Seeded shuffle, then the last round(val_fraction * N) examples form the
// validation part.
std::pair<MultiLabelDataset, MultiLabelDataset> split(
    const MultiLabelDataset& ds, double val_fraction, std::uint64_t seed);

struct SynthConfig {
  std::uint64_t seed = 0;
  Index labels = 16;
  Index features = 64;
  Index instances = 2000;
  double avg_labels = 2.5;
  Index clusters = 4;
  // Active coordinates per label prototype and per cluster prototype.
  Index prototype_support = 6;
  // Standard deviation of the per-instance perturbation on active coordinates.
  double noise = 0.3;
  // Extra off-prototype features switched on per instance.
  Index noise_features = 2;
};

// Labels are split into `clusters` contiguous groups. Each instance picks a
// cluster, draws a clipped-Poisson number of labels from it, and sums the
// cluster prototype, the chosen label prototypes and Gaussian noise.
MultiLabelDataset synth_multilabel(const SynthConfig& cfg);

// Cluster of each label under synth_multilabel's grouping.
std::vector<Index> synth_cluster_of(Index labels, Index clusters);

// Compaction of the label space onto labels that own at least one example.
struct LabelRemap {
  Index original_labels = 0;
  std::vector<std::optional<Label>> to_compact;  // by original label
  std::vector<Label> to_original;                // by compact label

  Index compact_labels() const {
    return static_cast<Index>(to_original.size());
  }
  bool identity() const { return compact_labels() == original_labels; }
};

LabelRemap compact_labels(const MultiLabelDataset& train);

// Relabels `ds`; examples left with no labels are dropped and counted.
std::pair<MultiLabelDataset, std::size_t> apply_remap(
    const MultiLabelDataset& ds, const LabelRemap& remap);

}  // namespace fedalc

#endif  // FEDALC_DATA_HPP_
