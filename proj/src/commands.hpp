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

#ifndef FEDALC_COMMANDS_HPP_
#define FEDALC_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "fedalc/data.hpp"
#include "fedalc/numeric.hpp"

namespace fedalc::cli {

namespace fs = std::filesystem;

struct PrepareOptions {
  fs::path input;                // training pool, XMLC format
  std::optional<fs::path> test;  // held-out test file copied through
  fs::path out;                  // output directory
  double val_frac = 0.05;
  std::uint64_t seed = 0;
};

// Writes train.txt, validation.txt, test.txt and shards.tsv (label, count)
// into opts.out. Without a test input, test.txt holds a header only.
void cmd_prepare(const PrepareOptions& opts, std::ostream& log);

struct SynthOptions {
  SynthConfig synth;
  fs::path out;
};
void cmd_synth(const SynthOptions& opts, std::ostream& log);

struct RunOptions {
  fs::path config;
  fs::path out_dir;
  std::optional<Index> workers;  // overrides the config file when set
};

// Writes history.csv, manifest.txt and checkpoint.bin into opts.out_dir.
void cmd_run(const RunOptions& opts, std::ostream& log);

// Returns true when every check of the suite passed. Throws ConfigError
// naming the valid suites for an unknown name.
bool cmd_verify(const std::string& suite, Index workers, std::ostream& log);

// Lower-case hex SHA-256 of the file contents.
std::string file_sha256(const fs::path& path);

}  // namespace fedalc::cli

#endif  // FEDALC_COMMANDS_HPP_
