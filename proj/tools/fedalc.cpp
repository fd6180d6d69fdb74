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

// fedalc: prepare datasets, run federated experiments, run verification
// suites. Log verbosity comes from FEDALC_LOG (trace, debug, info, warn,
// error, off); the default is info.

#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "commands.hpp"
#include "fedalc/error.hpp"
#include "verify/suites.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("fedalc");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("FEDALC_LOG")) {
    spdlog::cfg::helpers::load_levels(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  namespace cli = fedalc::cli;

  CLI::App app{"Federated multi-label learning with only positive labels"};
  app.require_subcommand(1);
  fedalc::Index workers = 0;
  app.add_option("--workers", workers,
                 "Client worker threads (0 = available cores)")
      ->check(CLI::NonNegativeNumber);

  cli::PrepareOptions prep;
  auto* prepare = app.add_subcommand(
      "prepare", "Split a dataset into train/validation files and shards");
  prepare->add_option("--input", prep.input, "Training pool in XMLC format")
      ->required()
      ->check(CLI::ExistingFile);
  prepare->add_option("--test", prep.test, "Held-out test file to copy through")
      ->check(CLI::ExistingFile);
  prepare->add_option("--out", prep.out, "Output directory")->required();
  prepare
      ->add_option("--val-frac", prep.val_frac,
                   "Fraction of the pool moved to validation")
      ->capture_default_str();
  prepare->add_option("--seed", prep.seed, "Split seed")->capture_default_str();

  cli::SynthOptions syn;
  auto* synth = app.add_subcommand(
      "synth", "Write a clustered synthetic multi-label dataset");
  synth->add_option("--out", syn.out, "Output XMLC file")->required();
  synth->add_option("--seed", syn.synth.seed)->capture_default_str();
  synth->add_option("--labels", syn.synth.labels)->capture_default_str();
  synth->add_option("--features", syn.synth.features)->capture_default_str();
  synth->add_option("--instances", syn.synth.instances)->capture_default_str();
  synth->add_option("--avg-labels", syn.synth.avg_labels)
      ->capture_default_str();
  synth->add_option("--clusters", syn.synth.clusters)->capture_default_str();
  synth->add_option("--noise", syn.synth.noise)->capture_default_str();

  cli::RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", run_opts.config, "key = value config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out-dir", run_opts.out_dir,
                  "Directory for history.csv, manifest.txt, checkpoint.bin")
      ->required();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("--suite", suite, fedalc::verify::kSuiteNames)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) {
      cli::cmd_prepare(prep, std::cout);
    } else if (*synth) {
      cli::cmd_synth(syn, std::cout);
    } else if (*run) {
      if (app.count("--workers") > 0) run_opts.workers = workers;
      cli::cmd_run(run_opts, std::cout);
    } else if (*verify) {
      return cli::cmd_verify(suite, workers, std::cout) ? 0 : 1;
    }
  } catch (const fedalc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
