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

#include <cmath>
#include <set>
#include <sstream>

#include "fedalc/federation.hpp"
#include "support.hpp"

using namespace fedalc;

namespace {

TrainConfig small_config(Algorithm algorithm) {
  TrainConfig cfg;
  cfg.algorithm = algorithm;
  cfg.rounds = 3;
  cfg.fixed_pretrain_steps = 20;
  cfg.server_lr = 0.05;
  cfg.batch_size = 8;
  cfg.seed = 11;
  cfg.dims = ModelDims{0, 8, 8, 8, 6};
  cfg.workers = 1;
  return cfg;
}

ExperimentData small_data(std::uint64_t seed) {
  SynthConfig synth;
  synth.seed = seed;
  synth.labels = 8;
  synth.features = 16;
  synth.instances = 160;
  synth.clusters = 2;
  synth.avg_labels = 2.0;
  const auto ds = synth_multilabel(synth);
  auto [rest, test] = split(ds, 0.2, seed + 1);
  auto [train, validation] = split(rest, 0.15, seed + 2);
  return {std::move(train), std::move(validation), std::move(test)};
}

void check_equal(const ModelParams& a, const ModelParams& b) {
  CHECK(a.embed_table == b.embed_table);
  CHECK(a.layer1.weight == b.layer1.weight);
  CHECK(a.layer1.bias == b.layer1.bias);
  CHECK(a.layer2.weight == b.layer2.weight);
  CHECK(a.layer2.bias == b.layer2.bias);
  CHECK(a.layer3.weight == b.layer3.weight);
  CHECK(a.layer3.bias == b.layer3.bias);
}

// Small model whose output cannot vanish: the last bias is nonzero.
ModelParams live_model(std::uint64_t seed, const ModelDims& dims) {
  ModelParams p = init_model(seed, dims);
  p.layer3.bias = Vector::LinSpaced(dims.output, 0.5, 1.0);
  return p;
}

ModelParams scaled(const ModelParams& p, double c) {
  ModelParams out = p;
  out.embed_table *= c;
  for (Linear* l : {&out.layer1, &out.layer2, &out.layer3}) {
    l->weight *= c;
    l->bias *= c;
  }
  return out;
}

}  // namespace

TEST_CASE("algorithm names") {
  for (auto a :
       {Algorithm::kFedAvg, Algorithm::kFedAvgFixed, Algorithm::kFedAwS,
        Algorithm::kFedALC, Algorithm::kFedALCFixed}) {
    CHECK(parse_algorithm(to_string(a)) == a);
  }
  CHECK_FALSE(parse_algorithm("fedprox").has_value());
  CHECK(has_dynamic_embeddings(Algorithm::kFedAwS));
  CHECK_FALSE(has_dynamic_embeddings(Algorithm::kFedALCFixed));
}

TEST_CASE("validate lists every problem") {
  TrainConfig cfg;
  cfg.rounds = 0;
  cfg.batch_size = 0;
  cfg.hp.nu = -1;
  try {
    validate(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rounds") != std::string::npos);
    CHECK(msg.find("batch_size") != std::string::npos);
    CHECK(msg.find("nu") != std::string::npos);
  }
  CHECK_NOTHROW(validate(TrainConfig{}));
}

TEST_CASE("client_update with zero learning rate returns its inputs") {
  test::Rng rng(71);
  TrainConfig cfg = small_config(Algorithm::kFedAvg);
  cfg.client_lr = 0.0;
  const ModelParams theta = live_model(1, ModelDims{10, 4, 4, 4, 3});
  const Vector w = rng.unit(3);
  ClientShard shard{0, {rng.sparse(10, 3), rng.sparse(10, 2)}};
  const ClientResult r = client_update(theta, w, shard, cfg, 5);
  check_equal(r.theta, theta);
  CHECK(r.class_embedding == w);
  CHECK(r.mean_loss >= 0);
  CHECK_THROWS_AS(client_update(theta, w, ClientShard{1, {}}, cfg, 5),
                  DegenerateInputError);
}

TEST_CASE("client_update leaves satisfied instances unchanged") {
  test::Rng rng(72);
  const TrainConfig cfg = small_config(Algorithm::kFedAvg);
  const ModelParams theta = live_model(2, ModelDims{10, 4, 4, 4, 3});
  const SparseVector x = rng.sparse(10, 3);
  const Vector emb = forward(theta, x).first;
  ClientShard shard{0, {x}};
  const ClientResult r = client_update(theta, emb, shard, cfg, 5);
  check_equal(r.theta, theta);
  CHECK(r.class_embedding == emb);
  CHECK(r.mean_loss == 0.0);
}

TEST_CASE("client_update keeps the class embedding on the unit sphere") {
  test::Rng rng(73);
  TrainConfig cfg = small_config(Algorithm::kFedAvg);
  cfg.local_epochs = 3;
  const ModelParams theta = live_model(3, ModelDims{10, 4, 4, 4, 3});
  ClientShard shard{0, {}};
  for (int i = 0; i < 20; ++i) shard.instances.push_back(rng.sparse(10, 3));
  const ClientResult r = client_update(theta, rng.unit(3), shard, cfg, 9);
  CHECK(std::abs(r.class_embedding.norm() - 1.0) <= 1e-12);

  cfg.algorithm = Algorithm::kFedAvgFixed;
  const Vector w = rng.unit(3);
  CHECK(client_update(theta, w, shard, cfg, 9).class_embedding == w);
}

TEST_CASE("server_aggregate") {
  const ModelParams theta = init_model(4, ModelDims{6, 3, 4, 4, 2});
  const std::vector<ModelParams> copies(5, theta);
  const ModelParams mean = server_aggregate(copies);
  CHECK(mean.layer1.weight.isApprox(theta.layer1.weight, 1e-15));
  CHECK(mean.embed_table.isApprox(theta.embed_table, 1e-15));

  const std::vector<ModelParams> pair{scaled(theta, 0.0), scaled(theta, 2.0)};
  check_equal(server_aggregate(pair), theta);

  CHECK_THROWS_AS(server_aggregate(std::vector<ModelParams>{}),
                  DegenerateInputError);
  const std::vector<ModelParams> mixed{theta,
                                       init_model(4, ModelDims{7, 3, 4, 4, 2})};
  CHECK_THROWS_AS(server_aggregate(mixed), DimensionError);
}

TEST_CASE("property: server_aggregate is permutation invariant") {
  test::Rng rng(74);
  for (int it = 0; it < 20; ++it) {
    std::vector<ModelParams> thetas;
    for (Index i = 0; i < rng.integer(1, 6); ++i) {
      thetas.push_back(init_model(100 + 10 * it + i, ModelDims{5, 3, 3, 3, 2}));
    }
    const ModelParams a = server_aggregate(thetas);
    std::shuffle(thetas.begin(), thetas.end(), rng.engine());
    const ModelParams b = server_aggregate(thetas);
    CHECK(a.layer2.weight.isApprox(b.layer2.weight, 1e-14));
    CHECK(a.embed_table.isApprox(b.embed_table, 1e-14));
  }
}

TEST_CASE("server_merge_embeddings") {
  test::Rng rng(75);
  const Matrix w = rng.unit_rows(4, 3);
  CHECK(server_merge_embeddings(w, {}) == w);
  const Matrix other = rng.unit_rows(4, 3);
  std::vector<ReturnedEmbedding> all;
  for (Label u = 0; u < 4; ++u) all.emplace_back(u, other.row(u).transpose());
  CHECK(server_merge_embeddings(w, all) == other);

  std::vector<ReturnedEmbedding> one{{2, other.row(2).transpose()}};
  const Matrix merged = server_merge_embeddings(w, one);
  CHECK(merged.row(2) == other.row(2));
  CHECK(merged.row(0) == w.row(0));

  std::vector<ReturnedEmbedding> dup{{1, Vector(other.row(1).transpose())},
                                     {1, Vector(other.row(1).transpose())}};
  CHECK_THROWS_AS(server_merge_embeddings(w, dup), RangeError);
  std::vector<ReturnedEmbedding> out_of_range{{4, Vector::Ones(3)}};
  CHECK_THROWS_AS(server_merge_embeddings(w, out_of_range), RangeError);
}

TEST_CASE("server_embedding_step") {
  test::Rng rng(76);
  const Matrix w = rng.unit_rows(5, 4);
  TrainConfig cfg = small_config(Algorithm::kFedAvg);
  CHECK(server_embedding_step(w, cfg, nullptr) == w);

  cfg.algorithm = Algorithm::kFedAwS;
  cfg.hp.lambda = 0.0;
  CHECK(server_embedding_step(w, cfg, nullptr) == w);

  // Two nearly identical rows move apart under the spreadout step.
  Matrix pair(2, 3);
  pair << 1, 0, 0, 0.999, std::sqrt(1 - 0.999 * 0.999), 0;
  cfg.hp.lambda = 1.0;
  cfg.hp.k_mine = 1;
  const Matrix next = server_embedding_step(pair, cfg, nullptr);
  CHECK(1 - next.row(0).dot(next.row(1)) > 1 - pair.row(0).dot(pair.row(1)));
  for (Index u = 0; u < 2; ++u) {
    CHECK(std::abs(next.row(u).norm() - 1.0) <= 1e-12);
  }

  cfg.algorithm = Algorithm::kFedALC;
  cfg.hp.k_mine = 2;
  CHECK_THROWS_AS(server_embedding_step(w, cfg, nullptr), Error);
  const SigmaWeights zero = SigmaWeights::uniform(5, 0.0);
  CHECK(server_embedding_step(w, cfg, &zero) == w);
  const SigmaWeights ones = SigmaWeights::uniform(5, 1.0);
  CHECK(server_embedding_step(w, cfg, &ones) != w);
}

TEST_CASE("train_fixed_embeddings") {
  LabelSetTable table;
  table.num_labels = 4;
  for (Label u = 0; u < 4; ++u) {
    LabelSetEntry e;
    e.key[0] = static_cast<std::uint8_t>(u);
    e.positives = {u};
    table.entries.push_back(e);
  }
  TrainConfig cfg = small_config(Algorithm::kFedALCFixed);
  cfg.fixed_pretrain_steps = 0;
  CHECK(train_fixed_embeddings(table, cfg, 3) ==
        init_class_embeddings(3, 4, cfg.dims.output));

  // Single-label instances: only the repulsion term acts, so the embeddings
  // spread.
  cfg.fixed_pretrain_steps = 50;
  cfg.server_lr = 0.1;
  const Matrix start = init_class_embeddings(3, 4, cfg.dims.output);
  const Matrix trained = train_fixed_embeddings(table, cfg, 3);
  HyperParams only_positive = cfg.hp;
  only_positive.beta = 0;
  CHECK(fixed_embedding_reg(trained, table, only_positive).value == 0.0);
  CHECK(fixed_embedding_reg(trained, table, cfg.hp).value <
        fixed_embedding_reg(start, table, cfg.hp).value);
  CHECK(collapse_gauge(trained) > collapse_gauge(start));
}

TEST_CASE("collapse_gauge") {
  Matrix same(3, 2);
  same << 1, 0, 1, 0, 1, 0;
  CHECK(collapse_gauge(same) == 0.0);
  Matrix anti(2, 2);
  anti << 0, 1, 0, -1;
  CHECK(collapse_gauge(anti) == 2.0);
  CHECK(collapse_gauge(Matrix::Identity(4, 4)) == 1.0);
  CHECK_THROWS_AS(collapse_gauge(Matrix::Identity(1, 1)), RangeError);
}

TEST_CASE("run_round with no local work and no server step") {
  const ExperimentData data = small_data(1);
  TrainConfig cfg = small_config(Algorithm::kFedAvg);
  cfg.local_epochs = 0;
  cfg.hp.lambda = 0.0;
  const auto shards = shard_by_label(data.train);
  ServerState state = initial_state(cfg, data.train.num_features, 8);
  const ServerState before = state;
  const auto [after, report] = run_round(state, shards, cfg, data.validation);
  CHECK(after.round == 1);
  CHECK(report.round == 1);
  CHECK(after.classes == before.classes);
  CHECK(after.theta.layer1.weight.isApprox(before.theta.layer1.weight, 1e-15));
  CHECK(after.theta.embed_table.isApprox(before.theta.embed_table, 1e-15));
  CHECK(report.mean_client_loss == 0.0);
  CHECK(report.collapse_gauge == collapse_gauge(before.classes));
}

TEST_CASE("run_round rejects a shard count that differs from C") {
  const ExperimentData data = small_data(1);
  const TrainConfig cfg = small_config(Algorithm::kFedAvg);
  auto shards = shard_by_label(data.train);
  shards.pop_back();
  CHECK_THROWS_AS(
      run_round(initial_state(cfg, 16, 8), shards, cfg, data.validation),
      DimensionError);
}

TEST_CASE("run_experiment with one round equals one run_round") {
  const ExperimentData data = small_data(2);
  TrainConfig cfg = small_config(Algorithm::kFedAwS);
  cfg.rounds = 1;
  const ExperimentResult r = run_experiment(data, cfg);
  REQUIRE(r.history.size() == 1);
  REQUIRE(r.remap.identity());

  TrainConfig direct = cfg;
  direct.dims.features = data.train.num_features;
  const auto shards = shard_by_label(data.train);
  const auto [state, report] =
      run_round(initial_state(direct, data.train.num_features, 8), shards,
                direct, data.validation);
  CHECK(report == r.history[0]);
  CHECK(state.classes == r.final_state.classes);
  CHECK(r.initial_collapse_gauge ==
        collapse_gauge(initial_state(direct, 16, 8).classes));
  CHECK(r.test.has_value());
}

TEST_CASE("property: histories are bit-identical across runs and workers") {
  for (auto alg : {Algorithm::kFedAvg, Algorithm::kFedAwS, Algorithm::kFedALC,
                   Algorithm::kFedALCFixed}) {
    const ExperimentData data = small_data(3);
    TrainConfig cfg = small_config(alg);
    const auto a = run_experiment(data, cfg);
    cfg.workers = 3;
    const auto b = run_experiment(data, cfg);
    CAPTURE(to_string(alg));
    CHECK(a.history == b.history);
    CHECK(a.final_state.classes == b.final_state.classes);
    std::ostringstream ca, cb;
    write_history_csv(ca, a.history);
    write_history_csv(cb, b.history);
    CHECK(ca.str() == cb.str());
  }
}

TEST_CASE("property: class embeddings stay unit norm every round") {
  const ExperimentData data = small_data(4);
  for (auto alg :
       {Algorithm::kFedAvg, Algorithm::kFedAwS, Algorithm::kFedALC}) {
    TrainConfig cfg = small_config(alg);
    cfg.dims.features = 16;
    const auto shards = shard_by_label(data.train);
    ServerState state = initial_state(cfg, 16, 8);
    if (alg == Algorithm::kFedALC) {
      state.sigma = compute_sigma(collect_label_sets(shards, 8, cfg, nullptr));
    }
    for (int t = 0; t < 4; ++t) {
      state = run_round(std::move(state), shards, cfg, data.validation).first;
      for (Index u = 0; u < 8; ++u) {
        CHECK(std::abs(state.classes.row(u).norm() - 1.0) <= 1e-6);
      }
    }
  }
}

TEST_CASE("fixed-embedding algorithms never move W") {
  const ExperimentData data = small_data(5);
  for (auto alg : {Algorithm::kFedALCFixed, Algorithm::kFedAvgFixed}) {
    TrainConfig cfg = small_config(alg);
    cfg.dims.features = 16;
    const auto shards = shard_by_label(data.train);
    ServerState state = initial_state(cfg, 16, 8);
    const std::uint64_t start = checksum(state.classes);
    for (int t = 0; t < 3; ++t) {
      state = run_round(std::move(state), shards, cfg, data.validation).first;
      CHECK(checksum(state.classes) == start);
    }
    const auto r = run_experiment(data, cfg);
    for (const auto& report : r.history) {
      CHECK(report.collapse_gauge == r.initial_collapse_gauge);
    }
  }
}

TEST_CASE("fedalc with every label on every instance keeps W fixed") {
  MultiLabelDataset all{6, 4, {}};
  test::Rng rng(77);
  for (int i = 0; i < 30; ++i) {
    all.examples.push_back({rng.sparse(6, 3), {0, 1, 2, 3}});
  }
  TrainConfig cfg = small_config(Algorithm::kFedALC);
  cfg.rounds = 4;
  cfg.dims.features = 6;
  cfg.hp.k_mine = 2;
  const auto shards = shard_by_label(all);
  const LabelSetTable table = collect_label_sets(shards, 4, cfg, nullptr);
  CHECK(table.size() == 30);
  const SigmaWeights sigma = compute_sigma(table);
  CHECK(sigma.to_dense().isZero());
  const Matrix w = init_class_embeddings(1, 4, cfg.dims.output);
  CHECK(server_embedding_step(w, cfg, &sigma) == w);
}

TEST_CASE("collect_label_sets recovers every positive set") {
  const ExperimentData data = small_data(6);
  const auto shards = shard_by_label(data.train);
  for (bool hashed : {false, true}) {
    TrainConfig cfg = small_config(Algorithm::kFedALC);
    cfg.hash_labels = hashed;
    const LabelSetTable table = collect_label_sets(shards, 8, cfg, nullptr);
    std::multiset<std::vector<Label>> got, want;
    for (const auto& e : table.entries) got.insert(e.positives);
    for (const auto& ex : data.train.examples) want.insert(ex.labels);
    CHECK(got == want);
  }
}

TEST_CASE("labels without training instances are dropped") {
  ExperimentData data = small_data(7);
  for (auto* ds : {&data.train, &data.validation, &data.test}) {
    ds->num_labels = 10;
  }
  data.test.examples.push_back({make_sparse(16, {{0, 1.0}}), {9}});
  const auto r = run_experiment(data, small_config(Algorithm::kFedAvg));
  CHECK(r.remap.compact_labels() == 8);
  CHECK(r.dropped_test == 1);
  CHECK(r.final_state.classes.rows() == 8);
}

TEST_CASE("write_history_csv format") {
  std::vector<RoundReport> h(2);
  h[0] = {1, {0.5, 0.25, 0.125, 0.1}, 0.75, 0.3};
  const double nan = std::nan("");
  h[1] = {2, {nan, nan, nan, nan}, 1.0, 0.0};
  std::ostringstream out;
  write_history_csv(out, h);
  CHECK(out.str() ==
        "# fedalc-history v1\n"
        "round,p_at_1,p_at_3,p_at_5,map,collapse_gauge,mean_client_loss\n"
        "1,0.5,0.25,0.125,0.1,0.75,0.3\n"
        "2,nan,nan,nan,nan,1,0\n");
}
