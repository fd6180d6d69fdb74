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

#include "commands.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "fedalc/config.hpp"
#include "fedalc/federation.hpp"
#include "verify/suites.hpp"

namespace fedalc::cli {

namespace {

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error("cannot create directory " + dir.string() + ": " +
                ec.message());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

void write_metrics(std::ostream& out, const std::string& prefix,
                   const Metrics& m) {
  out << prefix << "p_at_1 = " << number(m.p_at_1) << '\n'
      << prefix << "p_at_3 = " << number(m.p_at_3) << '\n'
      << prefix << "p_at_5 = " << number(m.p_at_5) << '\n'
      << prefix << "map = " << number(m.map) << '\n';
}

}  // namespace

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 initialization failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0 &&
        EVP_DigestUpdate(ctx.get(), buf.data(),
                         static_cast<std::size_t>(in.gcount())) != 1) {
      throw Error("SHA-256 update failed");
    }
  }
  Digest d{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), d.data(), &len) != 1 || len != d.size()) {
    throw Error("SHA-256 finalization failed");
  }
  return to_hex(d);
}

void cmd_prepare(const PrepareOptions& opts, std::ostream& log) {
  if (!(opts.val_frac >= 0.0 && opts.val_frac < 1.0)) {
    throw RangeError("--val-frac must lie in [0, 1)");
  }
  const MultiLabelDataset pool = load_xmlc(opts.input);
  MultiLabelDataset test{pool.num_features, pool.num_labels, {}};
  if (opts.test) {
    test = load_xmlc(*opts.test);
    if (test.num_features != pool.num_features ||
        test.num_labels != pool.num_labels) {
      throw DimensionError(
          "test file header (F=" + std::to_string(test.num_features) +
          ", L=" + std::to_string(test.num_labels) +
          ") differs from the input (F=" + std::to_string(pool.num_features) +
          ", L=" + std::to_string(pool.num_labels) + ")");
    }
  }
  const auto [train, validation] = split(pool, opts.val_frac, opts.seed);

  ensure_directory(opts.out);
  save_xmlc(opts.out / "train.txt", train);
  save_xmlc(opts.out / "validation.txt", validation);
  save_xmlc(opts.out / "test.txt", test);

  const auto shards = shard_by_label(train);
  auto tsv = open_output(opts.out / "shards.tsv");
  tsv << "label\tinstances\n";
  std::size_t empty = 0;
  for (const auto& s : shards) {
    tsv << s.label << '\t' << s.instances.size() << '\n';
    if (s.empty()) ++empty;
  }
  log << "train " << train.size() << ", validation " << validation.size()
      << ", test " << test.size() << " instances; " << shards.size()
      << " label shards (" << empty << " empty)\n";
  for (const char* name : {"train.txt", "validation.txt", "test.txt"}) {
    log << file_sha256(opts.out / name) << "  " << name << '\n';
  }
}

void cmd_synth(const SynthOptions& opts, std::ostream& log) {
  const auto ds = synth_multilabel(opts.synth);
  if (opts.out.has_parent_path()) ensure_directory(opts.out.parent_path());
  save_xmlc(opts.out, ds);
  log << "wrote " << ds.size() << " instances, F=" << ds.num_features
      << ", L=" << ds.num_labels << " to " << opts.out.string() << '\n';
}

void cmd_run(const RunOptions& opts, std::ostream& log) {
  RunConfig cfg = load_run_config(opts.config);
  if (opts.workers) cfg.train.workers = *opts.workers;

  ExperimentData data;
  data.train = load_xmlc(cfg.train_path);
  data.validation = load_xmlc(cfg.validation_path);
  if (!cfg.test_path.empty())
    data.test = load_xmlc(cfg.test_path);
  else
    data.test = {data.train.num_features, data.train.num_labels, {}};

  spdlog::info("running {} for {} rounds on {} training instances",
               to_string(cfg.train.algorithm), cfg.train.rounds,
               data.train.size());
  const ExperimentResult result = run_experiment(data, cfg.train);

  ensure_directory(opts.out_dir);
  const fs::path csv_path = opts.out_dir / "history.csv";
  {
    auto csv = open_output(csv_path);
    write_history_csv(csv, result.history);
  }
  save_checkpoint(opts.out_dir / "checkpoint.bin", result.final_state.theta,
                  result.final_state.classes);

  auto manifest = open_output(opts.out_dir / "manifest.txt");
  manifest << "# fedalc-manifest v1\n"
           << "# config snapshot; rerun with `fedalc run --config "
              "manifest.txt`\n"
           << format_run_config(cfg) << "# dataset sha256\n"
           << "# train " << file_sha256(cfg.train_path) << '\n'
           << "# validation " << file_sha256(cfg.validation_path) << '\n';
  if (!cfg.test_path.empty()) {
    manifest << "# test " << file_sha256(cfg.test_path) << '\n';
  }
  manifest << "# history " << csv_path.filename().string() << ' '
           << file_sha256(csv_path) << '\n'
           << "# seed " << cfg.train.seed << '\n'
           << "# labels " << result.remap.compact_labels() << " of "
           << result.remap.original_labels << '\n'
           << "# best_validation_round " << result.best_validation_round
           << '\n';
  std::ostringstream metrics;
  if (!result.history.empty()) {
    write_metrics(metrics, "# final validation ",
                  result.history.back().validation);
    metrics << "# final collapse_gauge = "
            << number(result.history.back().collapse_gauge) << '\n';
  }
  if (result.test) write_metrics(metrics, "# test ", *result.test);
  manifest << metrics.str();

  log << "wrote " << csv_path.string() << " (" << result.history.size()
      << " rounds)\n"
      << metrics.str();
}

bool cmd_verify(const std::string& suite, Index workers, std::ostream& log) {
  const auto result = verify::run_named_suite(suite, workers);
  if (!result) {
    throw ConfigError("unknown suite '" + suite +
                      "', valid choices: " + verify::kSuiteNames);
  }
  log << "suite " << result->name << '\n';
  for (const auto& line : result->details) log << "  " << line << '\n';
  log << (result->passed ? "PASS" : "FAIL") << '\n';
  return result->passed;
}

}  // namespace fedalc::cli
