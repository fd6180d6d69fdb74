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

#include "verify/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "fedalc/labelsets.hpp"
#include "verify/oracles.hpp"

namespace fedalc::verify {

namespace {

using oracle::Rows;

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  Index integer(Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double normal() { return std::normal_distribution<double>()(rng_); }

  Vector unit(Index d) {
    Vector v(d);
    do {
      for (Index i = 0; i < d; ++i) v[i] = normal();
    } while (v.norm() < 1e-3);
    return v.normalized();
  }
  Matrix unit_rows(Index c, Index d) {
    Matrix m(c, d);
    for (Index u = 0; u < c; ++u) m.row(u) = unit(d).transpose();
    return m;
  }
  Matrix sigma(Index c) {
    Matrix s(c, c);
    for (Index u = 0; u < c; ++u) {
      for (Index v = 0; v < c; ++v) s(u, v) = u == v ? 0.0 : uniform(0, 1);
    }
    return s;
  }
  std::vector<Label> label_set(Index c) {
    std::vector<Label> out;
    while (out.empty()) {
      for (Index u = 0; u < c; ++u) {
        if (uniform(0, 1) < 0.35) out.push_back(static_cast<Label>(u));
      }
    }
    return out;
  }
  SparseVector sparse(Index dim, Index active) {
    std::vector<std::pair<Index, double>> entries;
    std::vector<Index> idx(static_cast<std::size_t>(dim));
    for (Index i = 0; i < dim; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng_);
    active = std::min(active, dim);  // without replacement
    for (Index i = 0; i < active; ++i) entries.emplace_back(idx[i], normal());
    return make_sparse(dim, entries);
  }

 private:
  std::mt19937_64 rng_;
};

Vector flatten(const Matrix& m) {
  Vector out(m.size());
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out[r * m.cols() + c] = m(r, c);
  }
  return out;
}

Matrix unflatten(const Vector& x, Index offset, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = x[offset + r * cols + c];
  }
  return m;
}

Rows rows_of(const Vector& x, Index offset, Index rows, Index cols) {
  return oracle::to_rows(unflatten(x, offset, rows, cols));
}

LabelSetTable table_of(const oracle::LabelSets& sets, Index classes) {
  LabelSetTable t;
  t.num_labels = classes;
  for (std::size_t j = 0; j < sets.size(); ++j) {
    LabelSetEntry e;
    for (int b = 0; b < 8; ++b) {
      e.key[b] = static_cast<std::uint8_t>(j >> (8 * (7 - b)));
    }
    e.positives = sets[j];
    t.entries.push_back(std::move(e));
  }
  return t;
}

// Tracks the worst relative error of one gradient family.
struct Worst {
  const char* name;
  double value = 0.0;
  int cases = 0;

  void add(double e) {
    value = std::max(value, e);
    ++cases;
  }
};

Vector row_gradient(const LossResult& r, Index c, Index d) {
  return flatten(r.dense_row_gradient(c, d));
}

}  // namespace

void SuiteResult::check(bool ok, std::string line) {
  passed = passed && ok;
  details.push_back((ok ? "ok   " : "FAIL ") + std::move(line));
}

SuiteResult gradient_suite(std::uint64_t seed, int instances) {
  SuiteResult out{"gradients", true, {}};
  Gen g(seed);
  const double eps = kGradientStep;
  Worst pos{"positive_loss"}, con{"contrastive_loss"}, spr{"spreadout_reg"},
      sprk{"spreadout_reg_topk"}, cor{"correlation_reg"},
      cork{"correlation_reg_topk"}, fix{"fixed_embedding_reg"},
      net{"model backward"};

  for (int it = 0; it < instances; ++it) {
    const Index c = g.integer(3, 8);
    const Index d = g.integer(2, 8);
    const Index k = g.integer(1, c - 1);
    HyperParams hp;
    hp.alpha = g.uniform(0.1, 2.0);
    hp.beta = g.uniform(0.1, 2.0);
    hp.nu = g.uniform(0.5, 1.5);
    const Matrix w = g.unit_rows(c, d);
    const Vector emb = g.unit(d);
    const Vector wflat = flatten(w);

    {
      const double margin = g.uniform(0.5, 1.0);
      const Vector w_y = g.unit(d);
      const auto r = positive_loss(emb, w_y, margin);
      Vector x(2 * d), analytic(2 * d);
      x << emb, w_y;
      analytic << *r.grad_embedding, r.grad_rows.at(0);
      auto f = [&](const Vector& p) {
        return oracle::positive_loss(oracle::to_std(p.head(d)),
                                     oracle::to_std(p.tail(d)), margin);
      };
      pos.add(oracle::relative_error(analytic,
                                     oracle::central_difference(f, x, eps)));
    }
    {
      const Index y = g.integer(0, c - 1);
      const auto r = contrastive_loss(emb, y, w, hp);
      Vector x(d + c * d), analytic(d + c * d);
      x << emb, wflat;
      analytic << *r.grad_embedding, row_gradient(r, c, d);
      auto f = [&](const Vector& p) {
        return oracle::contrastive_loss(oracle::to_std(p.head(d)),
                                        static_cast<std::size_t>(y),
                                        rows_of(p, d, c, d), hp);
      };
      con.add(oracle::relative_error(analytic,
                                     oracle::central_difference(f, x, eps)));
    }
    auto rows_check = [&](Worst& worst, const LossResult& r,
                          const std::function<double(const Rows&)>& oracle_f) {
      auto f = [&](const Vector& p) { return oracle_f(rows_of(p, 0, c, d)); };
      worst.add(oracle::relative_error(
          row_gradient(r, c, d), oracle::central_difference(f, wflat, eps)));
    };
    rows_check(spr, spreadout_reg(w, hp.nu),
               [&](const Rows& rw) { return oracle::spreadout(rw, hp.nu); });
    rows_check(sprk, spreadout_reg_topk(w, k), [&](const Rows& rw) {
      return oracle::spreadout_topk(rw, static_cast<std::size_t>(k));
    });
    const Matrix s = g.sigma(c);
    const SigmaWeights sigma = SigmaWeights::from_dense(s);
    for (SigmaMode mode : {SigmaMode::kRaw, SigmaMode::kNormalized}) {
      const Rows sr = mode == SigmaMode::kRaw
                          ? oracle::to_rows(s)
                          : oracle::normalize(oracle::to_rows(s));
      rows_check(
          cor, correlation_reg(w, sigma, hp.nu, mode),
          [&](const Rows& rw) { return oracle::correlation(rw, sr, hp.nu); });
      rows_check(cork, correlation_reg_topk(w, sigma, k, hp.nu, mode),
                 [&](const Rows& rw) {
                   return oracle::correlation_topk(
                       rw, sr, static_cast<std::size_t>(k), hp.nu);
                 });
    }
    {
      oracle::LabelSets sets;
      const Index n = g.integer(1, 12);
      for (Index j = 0; j < n; ++j) sets.push_back(g.label_set(c));
      rows_check(fix, fixed_embedding_reg(w, table_of(sets, c), hp),
                 [&](const Rows& rw) {
                   return oracle::fixed_embedding(rw, sets, hp);
                 });
    }
    {
      ModelDims dims;
      dims.features = g.integer(3, 16);
      dims.embed = g.integer(2, 8);
      dims.hidden1 = g.integer(2, 8);
      dims.hidden2 = g.integer(2, 8);
      dims.output = g.integer(2, 8);
      ModelParams params =
          init_model(static_cast<std::uint64_t>(g.integer(0, 1 << 30)), dims);
      for (Linear* l : {&params.layer1, &params.layer2, &params.layer3}) {
        for (Index i = 0; i < l->bias.size(); ++i)
          l->bias[i] = 0.1 * g.normal();
      }
      const Index b = g.integer(1, 3);
      std::vector<SparseVector> xs;
      std::vector<const SparseVector*> members;
      for (Index i = 0; i < b; ++i) {
        xs.push_back(g.sparse(dims.features,
                              g.integer(1, std::min<Index>(4, dims.features))));
      }
      for (const auto& x : xs) members.push_back(&x);
      const SparseBatch batch = make_batch(members);
      Matrix probe(dims.output, b);
      for (Index i = 0; i < probe.size(); ++i) probe.data()[i] = g.normal();
      const auto [emb_out, cache] = forward(params, batch);
      const ModelGrads grads = backward(params, batch, cache, probe);
      const Rows probe_rows = oracle::to_rows(probe.transpose());

      // Parameters are packed as [embed_table, w1, b1, w2, b2, w3, b3].
      auto pack = [](const ModelParams& p) {
        std::vector<double> v;
        auto push = [&v](const auto& m) {
          for (Index r = 0; r < m.rows(); ++r) {
            for (Index cc = 0; cc < m.cols(); ++cc) v.push_back(m(r, cc));
          }
        };
        push(p.embed_table);
        for (const Linear* l : {&p.layer1, &p.layer2, &p.layer3}) {
          push(l->weight);
          push(l->bias);
        }
        return Vector(
            Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
      };
      auto unpack = [&params](const Vector& v) {
        ModelParams p = params;
        Index at = 0;
        auto pull = [&v, &at](auto& m) {
          for (Index r = 0; r < m.rows(); ++r) {
            for (Index cc = 0; cc < m.cols(); ++cc) m(r, cc) = v[at++];
          }
        };
        pull(p.embed_table);
        for (Linear* l : {&p.layer1, &p.layer2, &p.layer3}) {
          pull(l->weight);
          pull(l->bias);
        }
        return p;
      };
      ModelParams as_params = params;
      as_params.embed_table = grads.dense_embed(dims.features);
      as_params.layer1 = grads.layer1;
      as_params.layer2 = grads.layer2;
      as_params.layer3 = grads.layer3;
      auto f = [&](const Vector& v) {
        return oracle::network_probe(unpack(v), xs, probe_rows);
      };
      net.add(oracle::relative_error(
          pack(as_params), oracle::central_difference(f, pack(params), eps)));
    }
  }
  for (const Worst* w : {&pos, &con, &spr, &sprk, &cor, &cork, &fix, &net}) {
    out.check(w->value <= kGradientTolerance,
              fmt("%-22s %3d cases  max rel err %.3e (tol %.0e)", w->name,
                  w->cases, w->value, kGradientTolerance));
  }
  return out;
}

SuiteResult equivalence_suite(std::uint64_t seed, int instances) {
  SuiteResult out{"equivalences", true, {}};
  Gen g(seed);
  double uniform_gap = 0.0, spread_k_gap = 0.0, cor_k_gap = 0.0, norm_gap = 0.0,
         grad_gap = 0.0;
  for (int it = 0; it < instances; ++it) {
    const Index c = g.integer(2, 12);
    const Index d = g.integer(2, 10);
    const double nu = g.uniform(0.3, 2.0);
    const Matrix w = g.unit_rows(c, d);
    const auto sp = spreadout_reg(w, nu);
    const auto cu = correlation_reg(w, SigmaWeights::uniform(c, 1.0), nu);
    uniform_gap = std::max(uniform_gap, std::abs(sp.value - cu.value));
    grad_gap = std::max(
        grad_gap, (sp.dense_row_gradient(c, d) - cu.dense_row_gradient(c, d))
                      .cwiseAbs()
                      .maxCoeff());

    const auto sk = spreadout_reg_topk(w, c - 1);
    double full_neg = 0.0;
    for (Index u = 0; u < c; ++u) {
      for (Index v = 0; v < c; ++v) {
        if (u == v) continue;
        const double dist = 1.0 - w.row(u).dot(w.row(v));
        full_neg -= dist * dist;
      }
    }
    spread_k_gap = std::max(spread_k_gap, std::abs(sk.value - full_neg));

    const SigmaWeights sigma = SigmaWeights::from_dense(g.sigma(c));
    for (SigmaMode mode : {SigmaMode::kRaw, SigmaMode::kNormalized}) {
      const auto ck = correlation_reg_topk(w, sigma, c - 1, nu, mode);
      const auto cf = correlation_reg(w, sigma, nu, mode);
      cor_k_gap = std::max(cor_k_gap, std::abs(ck.value - cf.value));
    }
    const Vector sums = normalize_weights(sigma).row_sums();
    norm_gap = std::max(norm_gap, (sums.array() - 1.0).abs().maxCoeff());
  }
  out.check(
      uniform_gap <= kEquivalenceTolerance,
      fmt("correlation_reg(uniform sigma) - spreadout_reg  %.3e", uniform_gap));
  out.check(
      grad_gap <= kEquivalenceTolerance,
      fmt("gradient of the same pair                       %.3e", grad_gap));
  out.check(spread_k_gap <= kEquivalenceTolerance,
            fmt("spreadout_reg_topk(k=C-1) - full -d^2 sum       %.3e",
                spread_k_gap));
  out.check(
      cor_k_gap <= kEquivalenceTolerance,
      fmt("correlation_reg_topk(k=C-1) - correlation_reg   %.3e", cor_k_gap));
  out.check(
      norm_gap <= kNormalizationTolerance,
      fmt("normalize_weights row sums - 1                  %.3e", norm_gap));
  return out;
}

SuiteResult sigma_suite(std::uint64_t seed, int datasets) {
  SuiteResult out{"sigma", true, {}};
  Gen g(seed);
  int mismatched = 0, normalized_mismatch = 0;
  for (int it = 0; it < datasets; ++it) {
    const Index c = g.integer(2, 8);
    const Index n = g.integer(1, 30);
    oracle::LabelSets sets;
    for (Index j = 0; j < n; ++j) sets.push_back(g.label_set(c));
    const auto table = table_of(sets, c);
    const SigmaWeights sigma = compute_sigma(table);
    const Rows expected = oracle::sigma(sets, static_cast<std::size_t>(c));
    const Matrix dense = sigma.to_dense();
    bool same = true;
    for (Index u = 0; u < c; ++u) {
      for (Index v = 0; v < c; ++v) {
        same = same && dense(u, v) == expected[u][v] &&
               sigma(u, v) == expected[u][v];
      }
    }
    if (!same) ++mismatched;
    const Rows gamma = oracle::normalize(expected);
    const SigmaWeights norm = normalize_weights(sigma);
    for (Index u = 0; u < c; ++u) {
      for (Index v = 0; v < c; ++v) {
        if (std::abs(norm(u, v) - gamma[u][v]) > 1e-15) {
          ++normalized_mismatch;
          u = c;
          break;
        }
      }
    }
  }
  out.check(mismatched == 0,
            fmt("compute_sigma == double-loop count, exact: %d/%d datasets "
                "differ",
                mismatched, datasets));
  out.check(normalized_mismatch == 0,
            fmt("normalized weights within 1e-15: %d/%d datasets differ",
                normalized_mismatch, datasets));
  return out;
}

SuiteResult roundtrip_suite(int seeds) {
  SuiteResult out{"roundtrip", true, {}};
  for (int s = 0; s < seeds; ++s) {
    SynthConfig sc;
    sc.seed = static_cast<std::uint64_t>(s);
    const auto ds = synth_multilabel(sc);
    const auto shards = shard_by_label(ds);
    std::vector<std::vector<HashMessage>> batches;
    for (const auto& shard : shards) {
      batches.push_back(
          client_messages(shard, Canonicalization::kRawFeatures, nullptr));
    }
    const auto table = merge_messages(batches, ds.num_labels);
    std::map<Digest, const std::vector<Label>*> by_key;
    for (const auto& e : table.entries) by_key.emplace(e.key, &e.positives);
    std::size_t wrong = 0;
    for (const auto& ex : ds.examples) {
      const auto key = hash_instance(canonicalize_instance(
          ex.features, Canonicalization::kRawFeatures, nullptr));
      const auto it = by_key.find(key);
      if (it == by_key.end() || *it->second != ex.labels) ++wrong;
    }
    out.check(wrong == 0 && table.size() == ds.size(),
              fmt("seed %d: %zu instances, %zu label sets, %zu mismatched", s,
                  ds.size(), table.size(), wrong));
  }
  return out;
}

SuiteResult metrics_suite(std::uint64_t seed, int batches) {
  SuiteResult out{"metrics", true, {}};
  Gen g(seed);
  double p_gap = 0.0, macro_gap = 0.0, inst_gap = 0.0;
  for (int it = 0; it < batches; ++it) {
    const Index n = g.integer(1, 40);
    const Index c = g.integer(2, 12);
    // Every fourth batch draws scores from a small grid to force ties.
    const bool ties = it % 4 == 0;
    PredictionBatch batch;
    batch.scores.resize(n, c);
    for (Index i = 0; i < n; ++i) {
      for (Index u = 0; u < c; ++u) {
        batch.scores(i, u) =
            ties ? static_cast<double>(g.integer(0, 3)) : g.normal();
      }
      batch.truth.push_back(g.label_set(c));
    }
    const Rows scores = oracle::to_rows(batch.scores);
    for (Index k = 1; k <= c; ++k) {
      p_gap = std::max(
          p_gap, std::abs(precision_at_k(batch, k) -
                          oracle::precision_at_k(scores, batch.truth,
                                                 static_cast<std::size_t>(k))));
    }
    macro_gap = std::max(
        macro_gap,
        std::abs(mean_average_precision(batch, MapVariant::kMacroOverClasses) -
                 oracle::mean_average_precision_macro(scores, batch.truth)));
    inst_gap = std::max(
        inst_gap,
        std::abs(
            mean_average_precision(batch, MapVariant::kMeanOverInstances) -
            oracle::mean_average_precision_instances(scores, batch.truth)));
  }
  out.check(p_gap <= kMetricTolerance,
            fmt("precision_at_k, every k     max diff %.3e", p_gap));
  out.check(macro_gap <= kMetricTolerance,
            fmt("MAP macro over classes      max diff %.3e", macro_gap));
  out.check(inst_gap <= kMetricTolerance,
            fmt("MAP mean over instances     max diff %.3e", inst_gap));
  return out;
}

ExperimentData fixture_data(std::uint64_t seed) {
  SynthConfig sc;
  sc.seed = seed;
  sc.labels = 16;
  sc.features = 64;
  sc.instances = 2000;
  sc.avg_labels = 2.5;
  sc.clusters = 4;
  sc.noise = kFixtureNoise;
  const auto ds = synth_multilabel(sc);
  auto [rest, test] = split(ds, 0.2, seed + 100);
  auto [train, validation] = split(rest, 0.1, seed + 200);
  return {std::move(train), std::move(validation), std::move(test)};
}

TrainConfig fixture_config(Algorithm algorithm, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.algorithm = algorithm;
  cfg.rounds = 100;
  cfg.seed = seed;
  cfg.client_lr = 0.1;
  cfg.server_lr = kFixtureServerLr;
  cfg.hp.lambda = 1.0;
  cfg.hp.k_mine = 5;
  cfg.batch_size = 32;
  cfg.local_epochs = 1;
  cfg.dims.embed = 32;
  cfg.dims.hidden1 = 64;
  cfg.dims.hidden2 = 64;
  cfg.dims.output = 32;
  return cfg;
}

FixtureRun run_fixture(Algorithm algorithm, std::uint64_t seed, Index workers) {
  TrainConfig cfg = fixture_config(algorithm, seed);
  cfg.workers = workers;
  FixtureRun run;
  run.algorithm = algorithm;
  run.seed = seed;
  run.result = run_experiment(fixture_data(seed), cfg);
  std::ostringstream csv;
  write_history_csv(csv, run.result.history);
  run.csv = csv.str();
  return run;
}

SuiteResult collapse_suite(const std::vector<FixtureRun>& runs) {
  SuiteResult out{"collapse", true, {}};
  auto find = [&](Algorithm a) -> FixtureRun {
    for (const auto& r : runs) {
      if (r.algorithm == a && r.seed == kCollapseSeed) return r;
    }
    return run_fixture(a, kCollapseSeed);
  };
  const FixtureRun avg = find(Algorithm::kFedAvg);
  const FixtureRun alc = find(Algorithm::kFedALC);
  auto ratio = [](const FixtureRun& r) {
    return r.result.history.back().collapse_gauge /
           r.result.initial_collapse_gauge;
  };
  const double ra = ratio(avg), rc = ratio(alc);
  out.check(
      ra < kCollapsedFraction,
      fmt("fedavg gauge %.4f -> %.4f, ratio %.3f < %.2f",
          avg.result.initial_collapse_gauge,
          avg.result.history.back().collapse_gauge, ra, kCollapsedFraction));
  out.check(rc > kSpreadFraction,
            fmt("fedalc gauge %.4f -> %.4f, ratio %.3f > %.2f",
                alc.result.initial_collapse_gauge,
                alc.result.history.back().collapse_gauge, rc, kSpreadFraction));
  return out;
}

std::vector<FixtureRun> ordering_runs(Index workers) {
  std::vector<FixtureRun> runs;
  for (int s = 0; s < kOrderingSeeds; ++s) {
    for (Algorithm a :
         {Algorithm::kFedAvg, Algorithm::kFedAwS, Algorithm::kFedALC}) {
      runs.push_back(run_fixture(a, static_cast<std::uint64_t>(s), workers));
    }
  }
  return runs;
}

SuiteResult ordering_suite(const std::vector<FixtureRun>& runs) {
  SuiteResult out{"ordering", true, {}};
  auto median_p1 = [&](Algorithm a) {
    std::vector<double> v;
    for (const auto& r : runs) {
      if (r.algorithm == a) v.push_back(r.result.test->p_at_1);
    }
    std::sort(v.begin(), v.end());
    std::string line = std::string(to_string(a)) + " test P@1:";
    for (double p : v) line += fmt(" %.4f", p);
    out.details.push_back("     " + line);
    return v.empty() ? std::nan("") : v[v.size() / 2];
  };
  const double avg = median_p1(Algorithm::kFedAvg);
  const double aws = median_p1(Algorithm::kFedAwS);
  const double alc = median_p1(Algorithm::kFedALC);
  out.check(alc >= aws && aws >= avg,
            fmt("median P@1 fedalc %.4f >= fedaws %.4f >= fedavg %.4f", alc,
                aws, avg));
  out.check(alc - avg >= kOrderingGap,
            fmt("fedalc - fedavg = %.4f >= %.2f", alc - avg, kOrderingGap));
  return out;
}

SuiteResult determinism_suite(const std::vector<FixtureRun>& runs,
                              Index workers) {
  SuiteResult out{"determinism", true, {}};
  int differing = 0;
  for (const auto& r : runs) {
    const auto again = run_fixture(r.algorithm, r.seed, workers);
    if (again.csv != r.csv) {
      ++differing;
      out.details.push_back(fmt("     %s seed %llu differs",
                                std::string(to_string(r.algorithm)).c_str(),
                                static_cast<unsigned long long>(r.seed)));
    }
  }
  out.check(differing == 0,
            fmt("%zu repeated runs, %d CSVs differ", runs.size(), differing));
  return out;
}

std::optional<SuiteResult> run_named_suite(const std::string& name,
                                           Index workers) {
  constexpr std::uint64_t kSeed = 20240611;
  if (name == "gradients") return gradient_suite(kSeed);
  if (name == "equivalences") return equivalence_suite(kSeed);
  if (name == "sigma") return sigma_suite(kSeed);
  if (name == "roundtrip") return roundtrip_suite();
  if (name == "metrics") return metrics_suite(kSeed);
  if (name == "collapse") {
    return collapse_suite(
        {run_fixture(Algorithm::kFedAvg, kCollapseSeed, workers),
         run_fixture(Algorithm::kFedALC, kCollapseSeed, workers)});
  }
  if (name == "ordering") return ordering_suite(ordering_runs(workers));
  return std::nullopt;
}

}  // namespace fedalc::verify
