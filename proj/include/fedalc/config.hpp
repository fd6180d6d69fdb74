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

#ifndef FEDALC_CONFIG_HPP_
#define FEDALC_CONFIG_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fedalc/federation.hpp"

namespace fedalc {

// Experiment description read from a flat `key = value` file. Lines starting
// with '#' are comments. Keys are listed in docs/FORMATS.md.
struct RunConfig {
  TrainConfig train;
  std::filesystem::path train_path;
  std::filesystem::path validation_path;
  std::filesystem::path test_path;  // optional
};

// Every unknown key, malformed value and failed constraint is collected and
// reported together in one ConfigError.
RunConfig parse_run_config(std::istream& in);
// Relative data paths are taken relative to the config file; all paths are
// returned absolute.
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical snapshot: every key in fixed order, one per line.
std::string format_run_config(const RunConfig& cfg);

}  // namespace fedalc

#endif  // FEDALC_CONFIG_HPP_
