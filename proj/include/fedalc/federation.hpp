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

#ifndef FEDALC_FEDERATION_HPP_
#define FEDALC_FEDERATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedalc/data.hpp"
#include "fedalc/eval.hpp"
#include "fedalc/labelsets.hpp"
#include "fedalc/losses.hpp"
#include "fedalc/model.hpp"

namespace fedalc {

enum class Algorithm { kFedAvg, kFedAvgFixed, kFedAwS, kFedALC, kFedALCFixed };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);
inline constexpr std::string_view kAlgorithmNames =
    "fedavg, fedavg-fixed, fedaws, fedalc, fedalc-fixed";

// Whether clients report updated class embeddings back to the server.
bool has_dynamic_embeddings(Algorithm a);

enum class ServerRegularizer { kTopK, kFull };

struct TrainConfig {
  Algorithm algorithm = Algorithm::kFedALC;
  Index rounds = 300;
  Index fixed_pretrain_steps = 500;
  double client_lr = 0.1;
  double server_lr = 1e-4;
  HyperParams hp;
  Index local_epochs = 1;
  Index batch_size = 32;
  std::uint64_t seed = 0;
  SigmaMode sigma_mode = SigmaMode::kRaw;
  SigmaCounting sigma_counting = SigmaCounting::kInstanceCount;
  ServerRegularizer server_reg = ServerRegularizer::kTopK;
  Canonicalization canonicalization = Canonicalization::kRawFeatures;
  bool hash_labels = false;
  // `features` is taken from the data when left at 0.
  ModelDims dims;
  MapVariant map_variant = MapVariant::kMacroOverClasses;
  // Client threads per round; 0 means one per hardware thread.
  Index workers = 0;
};

// Throws ConfigError listing every violated constraint.
void validate(const TrainConfig& cfg);

struct ServerState {
  ModelParams theta;
  ClassEmbeddingMatrix classes;
  std::optional<SigmaWeights> sigma;
  Index round = 0;
};

struct Metrics {
  double p_at_1 = 0.0;
  double p_at_3 = 0.0;
  double p_at_5 = 0.0;
  double map = 0.0;

  bool operator==(const Metrics&) const = default;
};

struct RoundReport {
  Index round = 0;
  Metrics validation;  // NaN when the validation split is empty
  double collapse_gauge = 0.0;
  double mean_client_loss = 0.0;

  bool operator==(const RoundReport&) const = default;
};

struct ClientResult {
  ModelParams theta;
  Vector class_embedding;
  double mean_loss = 0.0;
};

// Local epochs of mini-batch SGD on the positive loss. The class embedding is
// re-projected onto the unit sphere after each step it moves, and stays
// frozen for the fixed-embedding algorithms.
ClientResult client_update(const ModelParams& theta, const Vector& w_y,
                           const ClientShard& shard, const TrainConfig& cfg,
                           std::uint64_t shuffle_seed);

// Running elementwise sum of model parameters, added in call order.
class ParamAccumulator {
 public:
  void add(const ModelParams& p);
  ModelParams mean() const;
  std::size_t count() const { return count_; }

 private:
  std::optional<ModelParams> sum_;
  std::size_t count_ = 0;
};

ModelParams server_aggregate(std::span<const ModelParams> thetas);

using ReturnedEmbedding = std::pair<Label, Vector>;

ClassEmbeddingMatrix server_merge_embeddings(
    const ClassEmbeddingMatrix& classes,
    std::span<const ReturnedEmbedding> returned);

// One step of size lambda * server_lr on the configured regularizer, then row
// re-normalization. Identity for the FedAvg variants.
ClassEmbeddingMatrix server_embedding_step(const ClassEmbeddingMatrix& classes,
                                           const TrainConfig& cfg,
                                           const SigmaWeights* sigma);

ClassEmbeddingMatrix train_fixed_embeddings(const LabelSetTable& labels,
                                            const TrainConfig& cfg,
                                            std::uint64_t seed);

// Mean cosine distance over unordered pairs of class embeddings.
double collapse_gauge(const ClassEmbeddingMatrix& classes);

PredictionBatch predict(const ModelParams& theta,
                        const ClassEmbeddingMatrix& classes,
                        const MultiLabelDataset& ds);
Metrics evaluate(const ModelParams& theta, const ClassEmbeddingMatrix& classes,
                 const MultiLabelDataset& ds,
                 MapVariant variant = MapVariant::kMacroOverClasses);

// Full participation: broadcast, local updates, averaging, embedding merge
// and server step (dynamic algorithms), then validation.
std::pair<ServerState, RoundReport> run_round(
    ServerState state, std::span<const ClientShard> shards,
    const TrainConfig& cfg, const MultiLabelDataset& validation);

// Client-side hashing and server-side merge over every shard.
LabelSetTable collect_label_sets(std::span<const ClientShard> shards,
                                 Index num_labels, const TrainConfig& cfg,
                                 const ModelParams* initial_theta);

struct ExperimentData {
  MultiLabelDataset train;
  MultiLabelDataset validation;
  MultiLabelDataset test;
};

struct ExperimentResult {
  std::vector<RoundReport> history;
  ServerState final_state;
  std::optional<Metrics> test;
  Index best_validation_round = 0;
  LabelRemap remap;
  std::size_t dropped_validation = 0;
  std::size_t dropped_test = 0;
  std::size_t collected_instances = 0;  // label-set table size, 0 if unused
  double initial_collapse_gauge = 0.0;  // before round 1
};

// Seeds the initial state exactly as run_experiment does.
ServerState initial_state(const TrainConfig& cfg, Index features,
                          Index classes);

// Labels absent from the training split are dropped before sharding.
ExperimentResult run_experiment(const ExperimentData& data, TrainConfig cfg);

inline constexpr std::string_view kHistoryCsvVersion = "# fedalc-history v1";

// Version comment, column header, then one row per round. Numbers use the
// shortest representation that round-trips; NaN prints as "nan".
void write_history_csv(std::ostream& out, std::span<const RoundReport> history);

}  // namespace fedalc

#endif  // FEDALC_FEDERATION_HPP_
