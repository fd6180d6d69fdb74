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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "fedalc/config.hpp"

using namespace fedalc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Workspace {
  fs::path root;
  explicit Workspace(const char* name)
      : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
};

fs::path make_dataset(const fs::path& dir) {
  cli::SynthOptions opts;
  opts.synth.labels = 8;
  opts.synth.features = 16;
  opts.synth.instances = 120;
  opts.synth.clusters = 2;
  opts.synth.avg_labels = 2.0;
  opts.out = dir / "pool.txt";
  std::ostringstream log;
  cli::cmd_synth(opts, log);
  return opts.out;
}

void write_config(const fs::path& path, const std::string& algorithm,
                  int rounds) {
  std::ofstream out(path);
  out << "algorithm = " << algorithm << "\nrounds = " << rounds
      << "\nembed_dim = 8\nhidden1 = 8\nhidden2 = 8\noutput_dim = 6\n"
      << "server_lr = 0.05\nfixed_pretrain_steps = 10\nworkers = 1\n"
      << "train = prep/train.txt\nvalidation = prep/validation.txt\n"
      << "test = prep/test.txt\n";
}

}  // namespace

TEST_CASE("file_sha256") {
  Workspace ws("fedalc_test_sha");
  {
    std::ofstream out(ws.root / "abc.txt", std::ios::binary);
    out << "abc";
  }
  CHECK(cli::file_sha256(ws.root / "abc.txt") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_THROWS_AS(cli::file_sha256(ws.root / "none"), Error);
}

TEST_CASE("cmd_prepare is deterministic") {
  Workspace ws("fedalc_test_prepare");
  const fs::path pool = make_dataset(ws.root);
  std::ostringstream log1, log2;
  cli::PrepareOptions opts{pool, std::nullopt, ws.root / "a", 0.1, 3};
  cli::cmd_prepare(opts, log1);
  opts.out = ws.root / "b";
  cli::cmd_prepare(opts, log2);
  for (const char* f :
       {"train.txt", "validation.txt", "test.txt", "shards.tsv"}) {
    CHECK(slurp(ws.root / "a" / f) == slurp(ws.root / "b" / f));
  }
  CHECK(slurp(ws.root / "a" / "test.txt") == "0 16 8\n");
  const std::string shards = slurp(ws.root / "a" / "shards.tsv");
  CHECK(shards.rfind("label\tinstances\n", 0) == 0);
  CHECK(log1.str().find(cli::file_sha256(ws.root / "a" / "train.txt")) !=
        std::string::npos);

  opts.out = ws.root / "c";
  opts.val_frac = 0.0;
  cli::cmd_prepare(opts, log1);
  CHECK(slurp(ws.root / "c" / "validation.txt") == "0 16 8\n");

  opts.val_frac = 1.0;
  CHECK_THROWS_AS(cli::cmd_prepare(opts, log1), RangeError);

  {
    std::ofstream bad(ws.root / "bad.txt");
    bad << "2 16 8\n0 1:1\n9 2:1\n";
  }
  opts = {ws.root / "bad.txt", std::nullopt, ws.root / "d", 0.1, 3};
  try {
    cli::cmd_prepare(opts, log1);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  {
    std::ofstream other(ws.root / "other.txt");
    other << "1 17 8\n0 1:1\n";
  }
  opts = {pool, ws.root / "other.txt", ws.root / "e", 0.1, 3};
  CHECK_THROWS_AS(cli::cmd_prepare(opts, log1), DimensionError);
}

TEST_CASE("cmd_run writes history, manifest and checkpoint") {
  Workspace ws("fedalc_test_run");
  const fs::path pool = make_dataset(ws.root);
  std::ostringstream log;
  // Hold out a test split first, then prepare train/validation.
  const auto ds = load_xmlc(pool);
  const auto [rest, test] = split(ds, 0.2, 1);
  save_xmlc(ws.root / "rest.txt", rest);
  save_xmlc(ws.root / "test_in.txt", test);
  cli::cmd_prepare(
      {ws.root / "rest.txt", ws.root / "test_in.txt", ws.root / "prep", 0.1, 2},
      log);

  write_config(ws.root / "one.cfg", "fedavg", 1);
  cli::cmd_run({ws.root / "one.cfg", ws.root / "out1", std::nullopt}, log);
  const std::string csv1 = slurp(ws.root / "out1" / "history.csv");
  std::istringstream lines(csv1);
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  CHECK(line == "# fedalc-history v1");
  std::getline(lines, line);
  CHECK(line ==
        "round,p_at_1,p_at_3,p_at_5,map,collapse_gauge,mean_client_loss");
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 1);
  CHECK(fs::exists(ws.root / "out1" / "checkpoint.bin"));
  const auto [theta, classes] =
      load_checkpoint(ws.root / "out1" / "checkpoint.bin");
  CHECK(classes.rows() == 8);

  write_config(ws.root / "alc.cfg", "fedalc", 4);
  cli::cmd_run({ws.root / "alc.cfg", ws.root / "a", std::nullopt}, log);
  cli::cmd_run({ws.root / "alc.cfg", ws.root / "b", Index{2}}, log);
  const std::string csv = slurp(ws.root / "a" / "history.csv");
  CHECK(csv == slurp(ws.root / "b" / "history.csv"));

  // The manifest is itself a runnable config.
  const fs::path manifest = ws.root / "a" / "manifest.txt";
  const std::string text = slurp(manifest);
  CHECK(text.rfind("# fedalc-manifest v1\n", 0) == 0);
  CHECK(text.find("# history history.csv " +
                  cli::file_sha256(ws.root / "a" / "history.csv")) !=
        std::string::npos);
  CHECK(text.find("# train " +
                  cli::file_sha256(ws.root / "prep" / "train.txt")) !=
        std::string::npos);
  CHECK(text.find("# test p_at_1 = ") != std::string::npos);
  cli::cmd_run({manifest, ws.root / "again", std::nullopt}, log);
  CHECK(slurp(ws.root / "again" / "history.csv") == csv);
  CHECK(slurp(ws.root / "again" / "manifest.txt") == text);

  write_config(ws.root / "bad.cfg", "fedmagic", 1);
  try {
    cli::cmd_run({ws.root / "bad.cfg", ws.root / "bad", std::nullopt}, log);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(std::string(kAlgorithmNames)) !=
          std::string::npos);
  }
}

TEST_CASE("cmd_verify") {
  std::ostringstream log;
  CHECK(cli::cmd_verify("sigma", 1, log));
  CHECK(log.str().find("PASS") != std::string::npos);
  CHECK_THROWS_AS(cli::cmd_verify("everything", 1, log), ConfigError);
}
