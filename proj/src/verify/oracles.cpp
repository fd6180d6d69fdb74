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

#include "verify/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fedalc::oracle {

namespace {

double hinge_sq(double nu, double d) {
  const double h = nu - d;
  return h > 0.0 ? h * h : 0.0;
}

bool contains(const std::vector<Label>& set, std::size_t u) {
  for (Label v : set) {
    if (v == u) return true;
  }
  return false;
}

// Label a outranks label b for one instance.
bool outranks(const std::vector<double>& scores, std::size_t a, std::size_t b) {
  return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
}

double ap_from_ranks(const std::vector<std::size_t>& positive_ranks) {
  double sum = 0.0;
  for (std::size_t r : positive_ranks) {
    std::size_t at_or_above = 0;
    for (std::size_t q : positive_ranks) {
      if (q <= r) ++at_or_above;
    }
    sum += static_cast<double>(at_or_above) / static_cast<double>(r);
  }
  return sum / static_cast<double>(positive_ranks.size());
}

}  // namespace

Rows to_rows(const Matrix& m) {
  Rows out(static_cast<std::size_t>(m.rows()),
           std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return 1.0 - s;
}

double positive_loss(const std::vector<double>& emb,
                     const std::vector<double>& w, double margin) {
  return hinge_sq(margin, 1.0 - distance(emb, w));
}

double contrastive_loss(const std::vector<double>& emb, std::size_t y,
                        const Rows& w, const HyperParams& hp) {
  double total = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    const double d = distance(emb, w[c]);
    if (c == y) {
      total += hp.alpha * d * d;
    } else {
      total += hp.beta * hinge_sq(hp.nu, d);
    }
  }
  return total;
}

double spreadout(const Rows& w, double nu) {
  double total = 0.0;
  for (std::size_t u = 0; u < w.size(); ++u) {
    for (std::size_t v = 0; v < w.size(); ++v) {
      if (u != v) total += hinge_sq(nu, distance(w[u], w[v]));
    }
  }
  return total;
}

std::vector<std::vector<std::size_t>> neighbors(const Rows& w, std::size_t k) {
  std::vector<std::vector<std::size_t>> out(w.size());
  for (std::size_t u = 0; u < w.size(); ++u) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t v = 0; v < w.size(); ++v) {
      if (v != u) all.emplace_back(distance(w[u], w[v]), v);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < k; ++i) out[u].push_back(all[i].second);
  }
  return out;
}

double spreadout_topk(const Rows& w, std::size_t k) {
  const auto nb = neighbors(w, k);
  double total = 0.0;
  for (std::size_t u = 0; u < w.size(); ++u) {
    for (std::size_t v : nb[u]) {
      const double d = distance(w[u], w[v]);
      total -= d * d;
    }
  }
  return total;
}

double correlation(const Rows& w, const Rows& sigma, double nu) {
  double total = 0.0;
  for (std::size_t u = 0; u < w.size(); ++u) {
    for (std::size_t v = 0; v < w.size(); ++v) {
      if (u != v) total += sigma[u][v] * hinge_sq(nu, distance(w[u], w[v]));
    }
  }
  return total;
}

double correlation_topk(const Rows& w, const Rows& sigma, std::size_t k,
                        double nu) {
  const auto nb = neighbors(w, k);
  double total = 0.0;
  for (std::size_t u = 0; u < w.size(); ++u) {
    for (std::size_t v : nb[u]) {
      total += sigma[u][v] * hinge_sq(nu, distance(w[u], w[v]));
    }
  }
  return total;
}

double fixed_embedding(const Rows& w, const LabelSets& positives,
                       const HyperParams& hp) {
  double total = 0.0;
  for (const auto& p : positives) {
    for (std::size_t y = 0; y < w.size(); ++y) {
      if (!contains(p, y)) continue;
      for (std::size_t z = 0; z < w.size(); ++z) {
        if (z == y) continue;
        const double d = distance(w[y], w[z]);
        if (contains(p, z)) {
          total += hp.alpha * d * d;
        } else {
          total += hp.beta * hinge_sq(hp.nu, d);
        }
      }
    }
  }
  return total / static_cast<double>(positives.size());
}

Rows sigma(const LabelSets& positives, std::size_t classes) {
  Rows counts(classes, std::vector<double>(classes, 0.0));
  for (const auto& p : positives) {
    for (std::size_t u = 0; u < classes; ++u) {
      for (std::size_t v = 0; v < classes; ++v) {
        if (u != v && contains(p, u) && !contains(p, v)) counts[u][v] += 1.0;
      }
    }
  }
  for (auto& row : counts) {
    for (double& x : row) x /= static_cast<double>(positives.size());
  }
  return counts;
}

Rows normalize(const Rows& sigma) {
  Rows out = sigma;
  for (std::size_t u = 0; u < sigma.size(); ++u) {
    double s = 0.0;
    for (std::size_t v = 0; v < sigma.size(); ++v) {
      if (v != u) s += sigma[u][v];
    }
    for (std::size_t v = 0; v < sigma.size(); ++v) {
      out[u][v] = (v == u || s == 0.0) ? 0.0 : sigma[u][v] / s;
    }
  }
  return out;
}

double precision_at_k(const Rows& scores, const LabelSets& truth,
                      std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::size_t hits = 0;
    for (std::size_t u = 0; u < scores[i].size(); ++u) {
      std::size_t above = 0;
      for (std::size_t v = 0; v < scores[i].size(); ++v) {
        if (v != u && outranks(scores[i], v, u)) ++above;
      }
      if (above < k && contains(truth[i], u)) ++hits;
    }
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(scores.size());
}

double mean_average_precision_macro(const Rows& scores,
                                    const LabelSets& truth) {
  const std::size_t n = scores.size();
  const std::size_t c = n == 0 ? 0 : scores[0].size();
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t u = 0; u < c; ++u) {
    std::vector<std::size_t> ranks;
    for (std::size_t i = 0; i < n; ++i) {
      if (!contains(truth[i], u)) continue;
      std::size_t rank = 1;
      for (std::size_t j = 0; j < n; ++j) {
        if (scores[j][u] > scores[i][u] ||
            (scores[j][u] == scores[i][u] && j < i)) {
          ++rank;
        }
      }
      ranks.push_back(rank);
    }
    if (ranks.empty()) continue;
    total += ap_from_ranks(ranks);
    ++counted;
  }
  return total / static_cast<double>(counted);
}

double mean_average_precision_instances(const Rows& scores,
                                        const LabelSets& truth) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::vector<std::size_t> ranks;
    for (std::size_t u = 0; u < scores[i].size(); ++u) {
      if (!contains(truth[i], u)) continue;
      std::size_t rank = 1;
      for (std::size_t v = 0; v < scores[i].size(); ++v) {
        if (v != u && outranks(scores[i], v, u)) ++rank;
      }
      ranks.push_back(rank);
    }
    total += ap_from_ranks(ranks);
  }
  return total / static_cast<double>(scores.size());
}

double network_probe(const ModelParams& params,
                     const std::vector<SparseVector>& xs, const Rows& probe) {
  auto affine = [](const Linear& layer, const std::vector<double>& in,
                   bool relu) {
    std::vector<double> out(static_cast<std::size_t>(layer.out()));
    for (Index r = 0; r < layer.out(); ++r) {
      double s = layer.bias[r];
      for (Index c = 0; c < layer.in(); ++c) s += layer.weight(r, c) * in[c];
      out[r] = relu ? std::max(0.0, s) : s;
    }
    return out;
  };
  double total = 0.0;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    std::vector<double> emb(static_cast<std::size_t>(params.embed_table.cols()),
                            0.0);
    for (SparseVector::InnerIterator it(xs[b]); it; ++it) {
      for (std::size_t d = 0; d < emb.size(); ++d) {
        emb[d] += it.value() * params.embed_table(it.index(), d);
      }
    }
    const auto h1 = affine(params.layer1, emb, true);
    const auto h2 = affine(params.layer2, h1, true);
    const auto raw = affine(params.layer3, h2, false);
    double norm = 0.0;
    for (double v : raw) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      total += probe[b][i] * raw[i] / norm;
    }
  }
  return total;
}

double relative_error(const Vector& analytic, const Vector& numeric,
                      double floor) {
  const double scale = std::max({analytic.norm(), numeric.norm(), floor});
  return (analytic - numeric).norm() / scale;
}

Vector central_difference(const std::function<double(const Vector&)>& f,
                          const Vector& x, double eps) {
  Vector g(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = f(probe);
    probe[i] = x[i] - eps;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

}  // namespace fedalc::oracle
