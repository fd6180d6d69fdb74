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

#include "fedalc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <vector>

namespace fedalc {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
bool parse_value(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !text.empty();
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename E>
struct Choice {
  const char* name;
  E value;
};

template <typename E, std::size_t N>
std::function<std::string(const std::string&)> choice_setter(
    E& field, const Choice<E> (&choices)[N]) {
  return [&field, &choices](const std::string& v) -> std::string {
    std::string names;
    for (const auto& c : choices) {
      if (v == c.name) {
        field = c.value;
        return {};
      }
      names += names.empty() ? "" : ", ";
      names += c.name;
    }
    return "expected one of: " + names;
  };
}

template <typename E, std::size_t N>
std::string choice_name(E value, const Choice<E> (&choices)[N]) {
  for (const auto& c : choices) {
    if (c.value == value) return c.name;
  }
  return "?";
}

constexpr Choice<SigmaMode> kSigmaModes[] = {
    {"raw", SigmaMode::kRaw}, {"normalized", SigmaMode::kNormalized}};
constexpr Choice<SigmaCounting> kSigmaCountings[] = {
    {"instance", SigmaCounting::kInstanceCount},
    {"per_instance", SigmaCounting::kPerInstanceNormalized}};
constexpr Choice<ServerRegularizer> kServerRegs[] = {
    {"topk", ServerRegularizer::kTopK}, {"full", ServerRegularizer::kFull}};
constexpr Choice<Canonicalization> kCanonicalizations[] = {
    {"raw", Canonicalization::kRawFeatures},
    {"embedding", Canonicalization::kInitialEmbedding}};
constexpr Choice<MapVariant> kMapVariants[] = {
    {"macro", MapVariant::kMacroOverClasses},
    {"instance", MapVariant::kMeanOverInstances}};
constexpr Choice<bool> kBools[] = {{"true", true}, {"false", false}};

using Setter = std::function<std::string(const std::string&)>;

template <typename T>
Setter number_setter(T& field) {
  return [&field](const std::string& v) -> std::string {
    T parsed{};
    if (!parse_value(v, parsed)) return "not a valid number";
    field = parsed;
    return {};
  };
}

std::map<std::string, Setter> setters(RunConfig& cfg) {
  TrainConfig& t = cfg.train;
  return {
      {"algorithm",
       [&t](const std::string& v) -> std::string {
         if (auto a = parse_algorithm(v)) {
           t.algorithm = *a;
           return {};
         }
         return "unknown algorithm, valid choices: " +
                std::string(kAlgorithmNames);
       }},
      {"rounds", number_setter(t.rounds)},
      {"fixed_pretrain_steps", number_setter(t.fixed_pretrain_steps)},
      {"client_lr", number_setter(t.client_lr)},
      {"server_lr", number_setter(t.server_lr)},
      {"alpha", number_setter(t.hp.alpha)},
      {"beta", number_setter(t.hp.beta)},
      {"nu", number_setter(t.hp.nu)},
      {"lambda", number_setter(t.hp.lambda)},
      {"margin_pos", number_setter(t.hp.margin_pos)},
      {"k_mine", number_setter(t.hp.k_mine)},
      {"local_epochs", number_setter(t.local_epochs)},
      {"batch_size", number_setter(t.batch_size)},
      {"seed", number_setter(t.seed)},
      {"sigma_mode", choice_setter(t.sigma_mode, kSigmaModes)},
      {"sigma_counting", choice_setter(t.sigma_counting, kSigmaCountings)},
      {"server_reg", choice_setter(t.server_reg, kServerRegs)},
      {"canonicalization",
       choice_setter(t.canonicalization, kCanonicalizations)},
      {"hash_labels", choice_setter(t.hash_labels, kBools)},
      {"embed_dim", number_setter(t.dims.embed)},
      {"hidden1", number_setter(t.dims.hidden1)},
      {"hidden2", number_setter(t.dims.hidden2)},
      {"output_dim", number_setter(t.dims.output)},
      {"map_variant", choice_setter(t.map_variant, kMapVariants)},
      {"workers", number_setter(t.workers)},
      {"train",
       [&cfg](const std::string& v) -> std::string {
         cfg.train_path = v;
         return {};
       }},
      {"validation",
       [&cfg](const std::string& v) -> std::string {
         cfg.validation_path = v;
         return {};
       }},
      {"test",
       [&cfg](const std::string& v) -> std::string {
         cfg.test_path = v;
         return {};
       }},
  };
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  auto table = setters(cfg);
  std::vector<std::string> problems;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) {
      problems.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (auto [prev, inserted] = seen.emplace(key, line_no); !inserted) {
      problems.push_back(where + "key '" + key + "' already set on line " +
                         std::to_string(prev->second));
      continue;
    }
    if (auto err = it->second(value); !err.empty()) {
      problems.push_back(where + key + " = '" + value + "': " + err);
    }
  }
  if (cfg.train_path.empty()) problems.emplace_back("missing key 'train'");
  if (cfg.validation_path.empty()) {
    problems.emplace_back("missing key 'validation'");
  }
  try {
    validate(cfg.train);
  } catch (const ConfigError& e) {
    std::istringstream lines(e.what());
    std::string l;
    std::getline(lines, l);  // header line
    while (std::getline(lines, l)) problems.push_back(trim(l));
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  RunConfig cfg = parse_run_config(in);
  const auto base = path.parent_path();
  for (auto* p : {&cfg.train_path, &cfg.validation_path, &cfg.test_path}) {
    if (p->empty()) continue;
    if (p->is_relative()) *p = base / *p;
    *p = std::filesystem::absolute(*p).lexically_normal();
  }
  return cfg;
}

std::string format_run_config(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  std::ostringstream out;
  out << "algorithm = " << to_string(t.algorithm) << '\n'
      << "rounds = " << t.rounds << '\n'
      << "fixed_pretrain_steps = " << t.fixed_pretrain_steps << '\n'
      << "client_lr = " << format_double(t.client_lr) << '\n'
      << "server_lr = " << format_double(t.server_lr) << '\n'
      << "alpha = " << format_double(t.hp.alpha) << '\n'
      << "beta = " << format_double(t.hp.beta) << '\n'
      << "nu = " << format_double(t.hp.nu) << '\n'
      << "lambda = " << format_double(t.hp.lambda) << '\n'
      << "margin_pos = " << format_double(t.hp.margin_pos) << '\n'
      << "k_mine = " << t.hp.k_mine << '\n'
      << "local_epochs = " << t.local_epochs << '\n'
      << "batch_size = " << t.batch_size << '\n'
      << "seed = " << t.seed << '\n'
      << "sigma_mode = " << choice_name(t.sigma_mode, kSigmaModes) << '\n'
      << "sigma_counting = " << choice_name(t.sigma_counting, kSigmaCountings)
      << '\n'
      << "server_reg = " << choice_name(t.server_reg, kServerRegs) << '\n'
      << "canonicalization = "
      << choice_name(t.canonicalization, kCanonicalizations) << '\n'
      << "hash_labels = " << choice_name(t.hash_labels, kBools) << '\n'
      << "embed_dim = " << t.dims.embed << '\n'
      << "hidden1 = " << t.dims.hidden1 << '\n'
      << "hidden2 = " << t.dims.hidden2 << '\n'
      << "output_dim = " << t.dims.output << '\n'
      << "map_variant = " << choice_name(t.map_variant, kMapVariants) << '\n'
      << "workers = " << t.workers << '\n'
      << "train = " << cfg.train_path.string() << '\n'
      << "validation = " << cfg.validation_path.string() << '\n';
  if (!cfg.test_path.empty())
    out << "test = " << cfg.test_path.string() << '\n';
  return out.str();
}

}  // namespace fedalc
