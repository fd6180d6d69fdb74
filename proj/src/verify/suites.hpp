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

#ifndef FEDALC_VERIFY_SUITES_HPP_
#define FEDALC_VERIFY_SUITES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedalc/federation.hpp"

namespace fedalc::verify {

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> details;

  void check(bool ok, std::string line);
};

// Analytic gradients of every loss, regularizer and the network against
// central differences of the scalar oracles.
inline constexpr double kGradientTolerance = 1e-4;
inline constexpr double kGradientStep = 1e-6;
SuiteResult gradient_suite(std::uint64_t seed, int instances = 50);

// Uniform-sigma, full-neighborhood and normalization identities.
inline constexpr double kEquivalenceTolerance = 1e-12;
inline constexpr double kNormalizationTolerance = 1e-9;
SuiteResult equivalence_suite(std::uint64_t seed, int instances = 50);

// compute_sigma against the double-loop count, compared exactly.
SuiteResult sigma_suite(std::uint64_t seed, int datasets = 100);

// synth -> shard -> hash -> merge recovers every positive label set.
SuiteResult roundtrip_suite(int seeds = 10);

// precision_at_k and MAP against rank-counting re-implementations.
inline constexpr double kMetricTolerance = 1e-12;
SuiteResult metrics_suite(std::uint64_t seed, int batches = 100);

// Synthetic benchmark shared by the collapse, ordering and determinism
// checks: 16 labels in 4 clusters, 64 features, 2000 instances, 2.5 labels
// per instance on average, 100 rounds.
inline constexpr double kFixtureNoise = 1.25;
inline constexpr double kFixtureServerLr = 0.1;
ExperimentData fixture_data(std::uint64_t seed);
TrainConfig fixture_config(Algorithm algorithm, std::uint64_t seed);

struct FixtureRun {
  Algorithm algorithm{};
  std::uint64_t seed = 0;
  ExperimentResult result;
  std::string csv;
};
FixtureRun run_fixture(Algorithm algorithm, std::uint64_t seed,
                       Index workers = 0);

inline constexpr double kCollapsedFraction = 0.2;
inline constexpr double kSpreadFraction = 0.5;
inline constexpr std::uint64_t kCollapseSeed = 0;
// Accepts runs of the collapse seed for fedavg and fedalc; runs both when
// absent.
SuiteResult collapse_suite(const std::vector<FixtureRun>& runs = {});

inline constexpr int kOrderingSeeds = 5;
inline constexpr double kOrderingGap = 0.10;
std::vector<FixtureRun> ordering_runs(Index workers = 0);
SuiteResult ordering_suite(const std::vector<FixtureRun>& runs);

// Re-runs every given fixture run and compares CSV bytes.
SuiteResult determinism_suite(const std::vector<FixtureRun>& runs,
                              Index workers = 0);

// Names accepted by run_named_suite.
inline constexpr const char* kSuiteNames =
    "gradients, equivalences, sigma, roundtrip, metrics, collapse, ordering";
std::optional<SuiteResult> run_named_suite(const std::string& name,
                                           Index workers = 0);

}  // namespace fedalc::verify

#endif  // FEDALC_VERIFY_SUITES_HPP_
