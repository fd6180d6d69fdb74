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

#include "fedalc/federation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

namespace fedalc {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kThetaStream = 1;
constexpr std::uint64_t kClassStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kObfuscationStream = 4;

Index resolve_workers(Index requested) {
  if (requested > 0) return requested;
  return std::max<Index>(1, std::thread::hardware_concurrency());
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kFedAvg:
      return "fedavg";
    case Algorithm::kFedAvgFixed:
      return "fedavg-fixed";
    case Algorithm::kFedAwS:
      return "fedaws";
    case Algorithm::kFedALC:
      return "fedalc";
    case Algorithm::kFedALCFixed:
      return "fedalc-fixed";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a :
       {Algorithm::kFedAvg, Algorithm::kFedAvgFixed, Algorithm::kFedAwS,
        Algorithm::kFedALC, Algorithm::kFedALCFixed}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

bool has_dynamic_embeddings(Algorithm a) {
  return a == Algorithm::kFedAvg || a == Algorithm::kFedAwS ||
         a == Algorithm::kFedALC;
}

void validate(const TrainConfig& cfg) {
  std::vector<std::string> problems;
  auto require = [&](bool ok, const char* msg) {
    if (!ok) problems.emplace_back(msg);
  };
  require(cfg.rounds >= 1, "rounds must be >= 1");
  require(cfg.fixed_pretrain_steps >= 0, "fixed_pretrain_steps must be >= 0");
  require(cfg.client_lr > 0 && std::isfinite(cfg.client_lr),
          "client_lr must be > 0");
  require(cfg.server_lr > 0 && std::isfinite(cfg.server_lr),
          "server_lr must be > 0");
  require(cfg.local_epochs >= 0, "local_epochs must be >= 0");
  require(cfg.batch_size >= 1, "batch_size must be >= 1");
  require(cfg.workers >= 0, "workers must be >= 0");
  require(cfg.dims.embed >= 1 && cfg.dims.hidden1 >= 1 &&
              cfg.dims.hidden2 >= 1 && cfg.dims.output >= 2,
          "model dimensions must be positive (output >= 2)");
  try {
    validate(cfg.hp);
  } catch (const RangeError& e) {
    problems.emplace_back(e.what());
  }
  if (!problems.empty()) {
    std::string msg = "invalid training configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

ClientResult client_update(const ModelParams& theta, const Vector& w_y,
                           const ClientShard& shard, const TrainConfig& cfg,
                           std::uint64_t shuffle_seed) {
  if (shard.empty()) {
    throw DegenerateInputError("client_update: shard for label " +
                               std::to_string(shard.label) + " is empty");
  }
  ClientResult out{theta, w_y, 0.0};
  const bool train_class = has_dynamic_embeddings(cfg.algorithm);
  const auto n = shard.instances.size();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(shuffle_seed);
  std::vector<const SparseVector*> members;

  double loss_sum = 0.0;
  std::size_t seen = 0;
  for (Index epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      members.clear();
      for (std::size_t i = start; i < std::min(n, start + batch); ++i) {
        members.push_back(&shard.instances[order[i]]);
      }
      const SparseBatch x = make_batch(members);
      const auto [emb, cache] = forward(out.theta, x);
      const auto loss =
          positive_loss_batch(emb, out.class_embedding, cfg.hp.margin_pos);
      loss_sum += loss.value * static_cast<double>(members.size());
      seen += members.size();

      const auto grads = backward(out.theta, x, cache, loss.grad_embeddings);
      apply_sgd(out.theta, grads, cfg.client_lr);
      if (train_class && cfg.client_lr > 0 &&
          loss.grad_class.squaredNorm() > 0) {
        out.class_embedding = l2_normalize(
            sgd_step(out.class_embedding, loss.grad_class, cfg.client_lr));
      }
    }
  }
  out.mean_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
  return out;
}

void ParamAccumulator::add(const ModelParams& p) {
  if (!sum_) {
    sum_ = p;
  } else {
    if (!(sum_->dims() == p.dims())) {
      throw DimensionError("server_aggregate: parameter shapes differ");
    }
    sum_->embed_table += p.embed_table;
    for (auto [dst, src] : {std::pair{&sum_->layer1, &p.layer1},
                            std::pair{&sum_->layer2, &p.layer2},
                            std::pair{&sum_->layer3, &p.layer3}}) {
      dst->weight += src->weight;
      dst->bias += src->bias;
    }
  }
  ++count_;
}

ModelParams ParamAccumulator::mean() const {
  if (!sum_) throw DegenerateInputError("server_aggregate: no parameters");
  ModelParams m = *sum_;
  const double inv = 1.0 / static_cast<double>(count_);
  m.embed_table *= inv;
  for (Linear* l : {&m.layer1, &m.layer2, &m.layer3}) {
    l->weight *= inv;
    l->bias *= inv;
  }
  return m;
}

ModelParams server_aggregate(std::span<const ModelParams> thetas) {
  ParamAccumulator acc;
  for (const auto& t : thetas) acc.add(t);
  return acc.mean();
}

ClassEmbeddingMatrix server_merge_embeddings(
    const ClassEmbeddingMatrix& classes,
    std::span<const ReturnedEmbedding> returned) {
  ClassEmbeddingMatrix out = classes;
  std::vector<bool> seen(static_cast<std::size_t>(classes.rows()), false);
  for (const auto& [label, row] : returned) {
    if (static_cast<Index>(label) >= classes.rows()) {
      throw RangeError("server_merge_embeddings: label " +
                       std::to_string(label) + " out of range");
    }
    if (seen[label]) {
      throw RangeError("server_merge_embeddings: duplicate label " +
                       std::to_string(label));
    }
    if (row.size() != classes.cols()) {
      throw DimensionError("server_merge_embeddings: row dimension mismatch");
    }
    seen[label] = true;
    out.row(label) = row.transpose();
  }
  return out;
}

ClassEmbeddingMatrix server_embedding_step(const ClassEmbeddingMatrix& classes,
                                           const TrainConfig& cfg,
                                           const SigmaWeights* sigma) {
  const double step = cfg.hp.lambda * cfg.server_lr;
  if (step == 0.0) return classes;
  LossResult reg;
  const bool topk = cfg.server_reg == ServerRegularizer::kTopK;
  switch (cfg.algorithm) {
    case Algorithm::kFedAvg:
    case Algorithm::kFedAvgFixed:
    case Algorithm::kFedALCFixed:
      return classes;
    case Algorithm::kFedAwS:
      reg = topk ? spreadout_reg_topk(classes, cfg.hp.k_mine)
                 : spreadout_reg(classes, cfg.hp.nu);
      break;
    case Algorithm::kFedALC:
      if (sigma == nullptr) {
        throw Error("server_embedding_step: fedalc requires sigma weights");
      }
      reg = topk ? correlation_reg_topk(classes, *sigma, cfg.hp.k_mine,
                                        cfg.hp.nu, cfg.sigma_mode)
                 : correlation_reg(classes, *sigma, cfg.hp.nu, cfg.sigma_mode);
      break;
  }
  if (reg.grad_rows.empty()) return classes;
  ClassEmbeddingMatrix out = classes;
  for (const auto& [row, g] : reg.grad_rows) {
    out.row(row) -= step * g.transpose();
  }
  return normalize_rows(out);
}

ClassEmbeddingMatrix train_fixed_embeddings(const LabelSetTable& labels,
                                            const TrainConfig& cfg,
                                            std::uint64_t seed) {
  if (labels.empty()) {
    throw DegenerateInputError("train_fixed_embeddings: empty label table");
  }
  ClassEmbeddingMatrix w =
      init_class_embeddings(seed, labels.num_labels, cfg.dims.output);
  const double step = cfg.hp.lambda * cfg.server_lr;
  for (Index t = 0; t < cfg.fixed_pretrain_steps; ++t) {
    const auto reg = fixed_embedding_reg(w, labels, cfg.hp);
    for (const auto& [row, g] : reg.grad_rows)
      w.row(row) -= step * g.transpose();
    w = normalize_rows(w);
    if (t == 0 || (t + 1) % 100 == 0) {
      spdlog::debug("fixed embeddings step {}: reg={:.6f}", t + 1, reg.value);
    }
  }
  return w;
}

double collapse_gauge(const ClassEmbeddingMatrix& classes) {
  const Index c = classes.rows();
  if (c < 2) throw RangeError("collapse_gauge: need C >= 2");
  const Matrix gram = classes * classes.transpose();
  double total = 0.0;
  for (Index u = 0; u < c; ++u) {
    for (Index v = u + 1; v < c; ++v) total += 1.0 - gram(u, v);
  }
  return total / (0.5 * static_cast<double>(c) * static_cast<double>(c - 1));
}

PredictionBatch predict(const ModelParams& theta,
                        const ClassEmbeddingMatrix& classes,
                        const MultiLabelDataset& ds) {
  PredictionBatch batch;
  batch.scores.resize(static_cast<Index>(ds.size()), classes.rows());
  batch.truth.reserve(ds.size());
  constexpr std::size_t kChunk = 512;
  std::vector<const SparseVector*> members;
  for (std::size_t start = 0; start < ds.size(); start += kChunk) {
    members.clear();
    const std::size_t end = std::min(ds.size(), start + kChunk);
    for (std::size_t i = start; i < end; ++i) {
      members.push_back(&ds.examples[i].features);
    }
    const auto [emb, cache] = forward(theta, make_batch(members));
    batch.scores.middleRows(static_cast<Index>(start),
                            static_cast<Index>(end - start)) =
        (classes * emb).transpose();
  }
  for (const auto& ex : ds.examples) batch.truth.push_back(ex.labels);
  return batch;
}

Metrics evaluate(const ModelParams& theta, const ClassEmbeddingMatrix& classes,
                 const MultiLabelDataset& ds, MapVariant variant) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  if (ds.empty()) return {kNaN, kNaN, kNaN, kNaN};
  const auto batch = predict(theta, classes, ds);
  auto p_at = [&](Index k) {
    return precision_at_k(batch, std::min<Index>(k, classes.rows()));
  };
  return {p_at(1), p_at(3), p_at(5), mean_average_precision(batch, variant)};
}

std::pair<ServerState, RoundReport> run_round(
    ServerState state, std::span<const ClientShard> shards,
    const TrainConfig& cfg, const MultiLabelDataset& validation) {
  const auto clients = shards.size();
  if (static_cast<Index>(clients) != state.classes.rows()) {
    throw DimensionError("run_round: " + std::to_string(clients) +
                         " shards for " + std::to_string(state.classes.rows()) +
                         " classes");
  }
  const bool dynamic = has_dynamic_embeddings(cfg.algorithm);
  const auto workers = static_cast<std::size_t>(resolve_workers(cfg.workers));

  ParamAccumulator acc;
  std::vector<ReturnedEmbedding> returned;
  double loss_total = 0.0;
  std::vector<std::optional<ClientResult>> slot(workers);
  std::vector<std::exception_ptr> failure(workers);

  auto work = [&](std::size_t client, std::size_t s) {
    try {
      const auto& shard = shards[client];
      const Vector w_y = state.classes.row(shard.label).transpose();
      const auto seed = mix_seed(
          mix_seed(cfg.seed, kShuffleStream),
          static_cast<std::uint64_t>(state.round) * clients + shard.label);
      slot[s] = client_update(state.theta, w_y, shard, cfg, seed);
    } catch (...) {
      failure[s] = std::current_exception();
    }
  };

  // Clients run in chunks of `workers`; results are folded in client order.
  for (std::size_t begin = 0; begin < clients; begin += workers) {
    const std::size_t end = std::min(clients, begin + workers);
    if (end - begin == 1) {
      work(begin, 0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t i = begin; i < end; ++i) {
        pool.emplace_back(work, i, i - begin);
      }
    }
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t s = i - begin;
      if (failure[s]) std::rethrow_exception(failure[s]);
      ClientResult& r = *slot[s];
      acc.add(r.theta);
      loss_total += r.mean_loss;
      if (dynamic) {
        returned.emplace_back(shards[i].label, std::move(r.class_embedding));
      }
      slot[s].reset();
    }
  }

  state.theta = acc.mean();
  if (dynamic) {
    state.classes = server_merge_embeddings(state.classes, returned);
    state.classes = server_embedding_step(
        state.classes, cfg, state.sigma ? &*state.sigma : nullptr);
  }
  ++state.round;

  RoundReport report;
  report.round = state.round;
  report.validation =
      evaluate(state.theta, state.classes, validation, cfg.map_variant);
  report.collapse_gauge = collapse_gauge(state.classes);
  report.mean_client_loss = loss_total / static_cast<double>(clients);
  return {std::move(state), report};
}

LabelSetTable collect_label_sets(std::span<const ClientShard> shards,
                                 Index num_labels, const TrainConfig& cfg,
                                 const ModelParams* initial_theta) {
  std::optional<LabelObfuscator> obfuscator;
  if (cfg.hash_labels) {
    obfuscator.emplace(mix_seed(cfg.seed, kObfuscationStream), num_labels);
  }
  std::vector<std::vector<HashMessage>> batches;
  batches.reserve(shards.size());
  for (const auto& shard : shards) {
    auto msgs = client_messages(shard, cfg.canonicalization, initial_theta);
    if (obfuscator) obfuscator->conceal_all(msgs);
    batches.push_back(std::move(msgs));
  }
  auto table = merge_messages(batches, num_labels);
  if (obfuscator) {
    // The simulator maps opaque ids back so that sigma lines up with the
    // server's class-embedding rows.
    for (auto& e : table.entries) {
      for (auto& u : e.positives) u = obfuscator->reveal(u);
      std::sort(e.positives.begin(), e.positives.end());
    }
  }
  return table;
}

ServerState initial_state(const TrainConfig& cfg, Index features,
                          Index classes) {
  ModelDims dims = cfg.dims;
  dims.features = features;
  ServerState s;
  s.theta = init_model(mix_seed(cfg.seed, kThetaStream), dims);
  s.classes = init_class_embeddings(mix_seed(cfg.seed, kClassStream), classes,
                                    dims.output);
  return s;
}

ExperimentResult run_experiment(const ExperimentData& data, TrainConfig cfg) {
  validate(cfg);
  if (cfg.dims.features == 0) cfg.dims.features = data.train.num_features;
  if (cfg.dims.features != data.train.num_features) {
    throw DimensionError(
        "run_experiment: model feature dimension differs "
        "from the data");
  }
  ExperimentResult result;
  result.remap = compact_labels(data.train);
  const auto [train, dropped_train] = apply_remap(data.train, result.remap);
  auto [validation, dropped_val] = apply_remap(data.validation, result.remap);
  auto [test, dropped_test] = apply_remap(data.test, result.remap);
  result.dropped_validation = dropped_val;
  result.dropped_test = dropped_test;
  if (!result.remap.identity()) {
    spdlog::info("{} of {} labels have no training instances and are dropped",
                 result.remap.original_labels - result.remap.compact_labels(),
                 result.remap.original_labels);
  }
  if (dropped_val + dropped_test > 0) {
    spdlog::info(
        "excluded {} validation and {} test instances left without "
        "labels",
        dropped_val, dropped_test);
  }
  const Index classes = result.remap.compact_labels();
  if (classes < 2) throw DegenerateInputError("need at least two labels");

  const auto shards = shard_by_label(train);
  ServerState state = initial_state(cfg, train.num_features, classes);

  if (cfg.algorithm == Algorithm::kFedALC ||
      cfg.algorithm == Algorithm::kFedALCFixed) {
    const auto table = collect_label_sets(shards, classes, cfg, &state.theta);
    result.collected_instances = table.size();
    spdlog::info("collected {} label sets from {} training instances",
                 table.size(), train.size());
    if (cfg.algorithm == Algorithm::kFedALC) {
      state.sigma = compute_sigma(table, cfg.sigma_counting);
    } else {
      state.classes =
          train_fixed_embeddings(table, cfg, mix_seed(cfg.seed, kClassStream));
    }
  }

  result.initial_collapse_gauge = collapse_gauge(state.classes);
  double best = -1.0;
  for (Index t = 0; t < cfg.rounds; ++t) {
    auto [next, report] = run_round(std::move(state), shards, cfg, validation);
    state = std::move(next);
    spdlog::debug("round {}: val P@1={:.4f} gauge={:.4f} loss={:.5f}",
                  report.round, report.validation.p_at_1, report.collapse_gauge,
                  report.mean_client_loss);
    if (!std::isnan(report.validation.p_at_1) &&
        report.validation.p_at_1 > best) {
      best = report.validation.p_at_1;
      result.best_validation_round = report.round;
    }
    result.history.push_back(report);
  }
  if (!test.empty()) {
    result.test = evaluate(state.theta, state.classes, test, cfg.map_variant);
  }
  result.final_state = std::move(state);
  return result;
}

void write_history_csv(std::ostream& out,
                       std::span<const RoundReport> history) {
  auto num = [&out](double v) {
    if (std::isnan(v)) {
      out << "nan";
      return;
    }
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
  };
  out << kHistoryCsvVersion << '\n'
      << "round,p_at_1,p_at_3,p_at_5,map,collapse_gauge,mean_client_loss\n";
  for (const auto& r : history) {
    out << r.round;
    for (double v :
         {r.validation.p_at_1, r.validation.p_at_3, r.validation.p_at_5,
          r.validation.map, r.collapse_gauge, r.mean_client_loss}) {
      out << ',';
      num(v);
    }
    out << '\n';
  }
}

}  // namespace fedalc
