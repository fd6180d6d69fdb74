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

#include "fedalc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace fedalc {

namespace {

template <typename T>
T parse_number(std::string_view token, std::size_t line, const char* what) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  // from_chars rejects a leading '+', which some writers emit.
  if constexpr (std::is_floating_point_v<T>) {
    if (first != last && *first == '+') ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || token.empty()) {
    throw ParseError(
        std::string("non-numeric ") + what + " '" + std::string(token) + "'",
        line);
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

MultiLabelDataset parse_xmlc(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  MultiLabelDataset ds;

  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 3) {
      throw ParseError("malformed header, expected 'N F L'", line_no);
    }
    expected = parse_number<std::size_t>(tokens[0], line_no, "header field");
    ds.num_features = parse_number<Index>(tokens[1], line_no, "header field");
    ds.num_labels = parse_number<Index>(tokens[2], line_no, "header field");
    if (ds.num_features < 1 || ds.num_labels < 1) {
      throw ParseError("header dimensions must be positive", line_no);
    }
    break;
  }
  if (line_no == 0 || ds.num_labels == 0) {
    throw ParseError("missing header", line_no);
  }

  ds.examples.reserve(expected);
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (split_ws(view).empty()) continue;
    if (ds.examples.size() == expected) {
      throw ParseError(
          "more data lines than the header's N=" + std::to_string(expected),
          line_no);
    }
    // Label field is whatever precedes the first whitespace; a line that
    // starts with whitespace has no labels.
    if (view.front() == ' ' || view.front() == '\t') {
      throw ParseError("empty label field", line_no);
    }
    const auto tokens = split_ws(view);
    const std::string_view label_field = tokens[0];
    if (label_field.find(':') != std::string_view::npos) {
      throw ParseError("empty label field", line_no);
    }

    Example ex;
    std::size_t start = 0;
    while (start <= label_field.size()) {
      const auto comma = label_field.find(',', start);
      const auto end =
          comma == std::string_view::npos ? label_field.size() : comma;
      const auto tok = label_field.substr(start, end - start);
      const auto label = parse_number<long long>(tok, line_no, "label");
      if (label < 0 || label >= ds.num_labels) {
        throw ParseError("label " + std::to_string(label) +
                             " >= L=" + std::to_string(ds.num_labels),
                         line_no);
      }
      ex.labels.push_back(static_cast<Label>(label));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    std::sort(ex.labels.begin(), ex.labels.end());
    ex.labels.erase(std::unique(ex.labels.begin(), ex.labels.end()),
                    ex.labels.end());

    std::vector<std::pair<Index, double>> entries;
    entries.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(
            "feature token '" + std::string(tokens[t]) + "' is not idx:val",
            line_no);
      }
      const auto idx = parse_number<long long>(tokens[t].substr(0, colon),
                                               line_no, "feature index");
      const auto val = parse_number<double>(tokens[t].substr(colon + 1),
                                            line_no, "feature value");
      if (idx < 0 || idx >= ds.num_features) {
        throw ParseError("feature index " + std::to_string(idx) +
                             " >= F=" + std::to_string(ds.num_features),
                         line_no);
      }
      entries.emplace_back(static_cast<Index>(idx), val);
    }
    try {
      ex.features = make_sparse(ds.num_features, std::move(entries));
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.size() != expected) {
    throw ParseError("header declares N=" + std::to_string(expected) +
                         " examples but " + std::to_string(ds.examples.size()) +
                         " were found",
                     line_no);
  }
  return ds;
}

MultiLabelDataset load_xmlc(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return parse_xmlc(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void write_xmlc(std::ostream& out, const MultiLabelDataset& ds) {
  out << ds.size() << ' ' << ds.num_features << ' ' << ds.num_labels << '\n';
  char buf[64];
  for (const auto& ex : ds.examples) {
    for (std::size_t i = 0; i < ex.labels.size(); ++i) {
      if (i) out << ',';
      out << ex.labels[i];
    }
    for (SparseVector::InnerIterator it(ex.features); it; ++it) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), it.value());
      out << ' ' << it.index() << ':' << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
}

void save_xmlc(const std::filesystem::path& path, const MultiLabelDataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_xmlc(out, ds);
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<ClientShard> shard_by_label(const MultiLabelDataset& ds) {
  std::vector<ClientShard> shards(static_cast<std::size_t>(ds.num_labels));
  for (std::size_t u = 0; u < shards.size(); ++u) {
    shards[u].label = static_cast<Label>(u);
  }
  for (const auto& ex : ds.examples) {
    for (Label u : ex.labels) shards[u].instances.push_back(ex.features);
  }
  return shards;
}

std::pair<MultiLabelDataset, MultiLabelDataset> split(
    const MultiLabelDataset& ds, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw RangeError("split: fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::llround(val_fraction * static_cast<double>(ds.size())));

  MultiLabelDataset first{ds.num_features, ds.num_labels, {}};
  MultiLabelDataset second{ds.num_features, ds.num_labels, {}};
  const std::size_t n_first = ds.size() - n_val;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_first ? first : second).examples.push_back(ds.examples[order[i]]);
  }
  return {std::move(first), std::move(second)};
}

std::vector<Index> synth_cluster_of(Index labels, Index clusters) {
  std::vector<Index> cluster(static_cast<std::size_t>(labels));
  for (Index u = 0; u < labels; ++u) cluster[u] = u * clusters / labels;
  return cluster;
}

namespace {

// E[min(max(Poisson(rate), 1), cap)]
double clipped_poisson_mean(double rate, Index cap) {
  double pmf = std::exp(-rate);
  double below = 0.0;  // sum_{j < cap} P(j) * max(j, 1)
  double mass = 0.0;
  for (Index j = 0; j < cap; ++j) {
    below += pmf * static_cast<double>(std::max<Index>(j, 1));
    mass += pmf;
    pmf *= rate / static_cast<double>(j + 1);
  }
  return below + (1.0 - mass) * static_cast<double>(cap);
}

// Rate whose clipped mean equals `target`; 0 and +inf encode the endpoints.
double calibrate_rate(double target, Index cap) {
  if (target <= 1.0) return 0.0;
  if (target >= static_cast<double>(cap)) {
    return std::numeric_limits<double>::infinity();
  }
  double lo = 0.0, hi = 1.0;
  while (clipped_poisson_mean(hi, cap) < target) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (clipped_poisson_mean(mid, cap) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

MultiLabelDataset synth_multilabel(const SynthConfig& cfg) {
  if (cfg.labels < 4) throw RangeError("synth_multilabel: need C >= 4");
  if (cfg.clusters < 1 || cfg.clusters > cfg.labels) {
    throw RangeError("synth_multilabel: cluster_count must be in [1, C]");
  }
  if (cfg.features < 1 || cfg.instances < 0 || cfg.prototype_support < 1 ||
      cfg.prototype_support > cfg.features || cfg.noise < 0 ||
      cfg.noise_features < 0) {
    throw RangeError("synth_multilabel: infeasible parameters");
  }
  const auto cluster_of = synth_cluster_of(cfg.labels, cfg.clusters);
  std::vector<std::vector<Label>> members(
      static_cast<std::size_t>(cfg.clusters));
  for (Index u = 0; u < cfg.labels; ++u) {
    members[cluster_of[u]].push_back(static_cast<Label>(u));
  }
  std::vector<double> rates;
  for (const auto& m : members) {
    const auto cap = static_cast<Index>(m.size());
    if (cfg.avg_labels < 1.0 || cfg.avg_labels > static_cast<double>(cap)) {
      throw RangeError(
          "synth_multilabel: avg_labels must lie in [1, smallest cluster "
          "size]");
    }
    rates.push_back(calibrate_rate(cfg.avg_labels, cap));
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Index> any_feature(0, cfg.features - 1);

  auto draw_prototype = [&]() {
    Vector proto = Vector::Zero(cfg.features);
    std::vector<Index> coords(static_cast<std::size_t>(cfg.features));
    std::iota(coords.begin(), coords.end(), Index{0});
    std::shuffle(coords.begin(), coords.end(), rng);
    for (Index i = 0; i < cfg.prototype_support; ++i) {
      proto[coords[i]] = normal(rng);
    }
    return proto;
  };
  std::vector<Vector> cluster_proto, label_proto;
  for (Index c = 0; c < cfg.clusters; ++c) {
    cluster_proto.push_back(draw_prototype());
  }
  for (Index u = 0; u < cfg.labels; ++u)
    label_proto.push_back(draw_prototype());

  MultiLabelDataset ds{cfg.features, cfg.labels, {}};
  ds.examples.reserve(static_cast<std::size_t>(cfg.instances));
  std::uniform_int_distribution<Index> pick_cluster(0, cfg.clusters - 1);
  for (Index n = 0; n < cfg.instances; ++n) {
    const Index c = pick_cluster(rng);
    auto pool = members[c];
    const auto cap = static_cast<Index>(pool.size());
    Index count;
    if (rates[c] == 0.0) {
      count = 1;
    } else if (std::isinf(rates[c])) {
      count = cap;
    } else {
      std::poisson_distribution<Index> poisson(rates[c]);
      count = std::clamp<Index>(poisson(rng), 1, cap);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    Example ex;
    ex.labels.assign(pool.begin(), pool.begin() + count);
    std::sort(ex.labels.begin(), ex.labels.end());

    Vector x = cluster_proto[c];
    for (Label u : ex.labels) x += label_proto[u];
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0) x[i] += cfg.noise * normal(rng);
    }
    for (Index k = 0; k < cfg.noise_features; ++k) {
      x[any_feature(rng)] += cfg.noise * normal(rng);
    }
    std::vector<std::pair<Index, double>> entries;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0) entries.emplace_back(i, x[i]);
    }
    if (entries.empty()) entries.emplace_back(any_feature(rng), 1.0);
    ex.features = make_sparse(cfg.features, std::move(entries));
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

LabelRemap compact_labels(const MultiLabelDataset& train) {
  std::vector<bool> seen(static_cast<std::size_t>(train.num_labels), false);
  for (const auto& ex : train.examples) {
    for (Label u : ex.labels) seen[u] = true;
  }
  LabelRemap remap;
  remap.original_labels = train.num_labels;
  remap.to_compact.resize(seen.size());
  for (std::size_t u = 0; u < seen.size(); ++u) {
    if (!seen[u]) continue;
    remap.to_compact[u] = static_cast<Label>(remap.to_original.size());
    remap.to_original.push_back(static_cast<Label>(u));
  }
  return remap;
}

std::pair<MultiLabelDataset, std::size_t> apply_remap(
    const MultiLabelDataset& ds, const LabelRemap& remap) {
  if (ds.num_labels != remap.original_labels) {
    throw DimensionError("apply_remap: label space size mismatch");
  }
  MultiLabelDataset out{ds.num_features, remap.compact_labels(), {}};
  std::size_t dropped = 0;
  for (const auto& ex : ds.examples) {
    Example mapped{ex.features, {}};
    for (Label u : ex.labels) {
      if (const auto& c = remap.to_compact[u]) mapped.labels.push_back(*c);
    }
    if (mapped.labels.empty()) {
      ++dropped;
      continue;
    }
    out.examples.push_back(std::move(mapped));
  }
  return {std::move(out), dropped};
}

}  // namespace fedalc
