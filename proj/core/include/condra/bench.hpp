// Copyright 2026 The Condra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "condra/cond_index.hpp"
#include "condra/condition.hpp"
#include "condra/corpus.hpp"
#include "condra/strategies.hpp"
#include "condra/tree.hpp"

namespace condra {

inline constexpr int kReportSchemaVersion = 1;

struct ConditionSpec {
  std::string name;
  Condition condition;
};

/// Conditions over a generate_clustered_labels corpus at the given target
/// fractions: a union of round(f * labels) labels, an AND with bucket b0
/// when a single label is too coarse, and ALL at f >= 1.
std::vector<ConditionSpec> clustered_condition_specs(std::size_t labels, std::size_t buckets,
                                                     const std::vector<double>& fractions);
std::vector<double> default_condition_fractions();

struct SpeedOptions {
  std::vector<Strategy> strategies = {Strategy::kConditional, Strategy::kQueryThenFilter,
                                      Strategy::kReconfigured, Strategy::kBruteForce,
                                      Strategy::kDedicated};
  std::size_t k = 10;
  std::size_t queries = 1000;
  std::size_t repetitions = 5;
  std::size_t warmup = 100;
  std::size_t leaf_size = 64;
  double exact_sample = 0.05;
  std::uint64_t seed = 1;
  // Calibrate the reconfigured threshold from the brute and qtf rows;
  // otherwise use `reconfig_threshold` as given.
  bool calibrate = true;
  std::size_t reconfig_threshold = kDefaultReconfigThreshold;
};

struct BenchRow {
  Strategy strategy = Strategy::kBruteForce;
  std::string condition;  // spec name
  std::string expression;
  std::size_t members = 0;
  double fraction = 0.0;
  int bucket = 0;  // floor(log10(fraction))
  double median_ms = 0.0;
  double p90_ms = 0.0;
  double speedup = 1.0;  // brute median / this median
  double mean_nodes_visited = 0.0;
  double mean_points_scored = 0.0;
  std::size_t exact_checked = 0;
  bool exact = true;
  std::size_t brute_branch = 0;  // reconfigured: queries routed to brute force
};

struct BenchReport {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t leaf_size = 0;
  Metric metric = Metric::kEuclidean;
  std::size_t repetitions = 0;
  std::size_t warmup = 0;
  std::size_t queries = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t reconfig_threshold = 0;
  bool calibrated = false;
  double unconditional_median_ms = 0.0;  // knn_query on the same tree
  std::vector<BenchRow> rows;

  const BenchRow* find(Strategy s, const std::string& condition) const;
  bool all_exact() const;
};

/// Times every strategy on every condition with per-query medians over
/// `repetitions` runs after a warmup pass. Brute force is always measured as
/// the speedup baseline. Throws kConsistency with a replayable JSON instance
/// if a sampled result differs from brute force.
BenchReport run_speed_benchmark(const Corpus& corpus, const std::vector<ConditionSpec>& specs,
                                const SpeedOptions& options = {});

/// Threshold minimising the worst ratio of the chosen branch to the better
/// of brute force and query-then-filter across the report's conditions.
std::size_t calibrate_threshold(const BenchReport& report);

struct MemoryTable {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t leaf_size = 0;
  std::size_t node_count = 0;
  std::size_t node_bound = 0;  // 2 n / l
  bool node_bound_ok = false;
  std::size_t indexed_values = 0;  // c
  // Measured serialized sizes (32-bit features, bit-array index).
  std::size_t data_bytes = 0;
  std::size_t tree_bytes = 0;
  std::size_t index_bytes = 0;
  // Model figures.
  std::size_t centroid_bytes = 0;      // node_count * d * 4
  std::size_t index_bit_bytes = 0;     // c * node_count / 8
  std::size_t data_bytes_64 = 0;       // n * d * 8
  std::size_t centroid_bytes_64 = 0;   // node_count * d * 8
  std::size_t index_entry_bytes_64 = 0;  // c * node_count * 8
};

MemoryTable measure_memory(const Tree& tree, const CondIndex& index, const Corpus& corpus);
/// The same model arithmetic for a balanced tree that is too large to build.
MemoryTable model_memory(std::size_t n, std::size_t d, std::size_t leaf_size,
                         std::size_t values);

struct AccuracyTable {
  std::vector<std::size_t> ns;
  std::vector<double> accuracy;      // conditioned on a random other style
  std::vector<std::size_t> successes;
  std::vector<double> all_accuracy;  // under ALL, query point excluded
  std::size_t trials = 0;
  std::size_t n_content = 0;
  std::size_t n_style = 0;
  double baseline = 0.0;  // 1 / n_content
};

/// Accuracy@N: a random point, a random style other than its own, a
/// conditional query on that style, success when any of the top N shares the
/// point's content. Needs attributes `content` and `style`, >= 2 styles.
AccuracyTable accuracy_at_n(const Corpus& corpus, const std::vector<std::size_t>& ns,
                            std::size_t trials, std::uint64_t seed, std::size_t leaf_size = 64);

/// Same attributes and shape with N(0, I) features.
Corpus with_random_features(const Corpus& corpus, std::uint64_t seed);

std::string to_json(const BenchReport& report);
std::string to_json(const MemoryTable& table);
std::string to_json(const AccuracyTable& table);

}  // namespace condra
