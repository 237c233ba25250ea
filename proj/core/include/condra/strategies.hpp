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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "condra/cond_index.hpp"
#include "condra/condition.hpp"
#include "condra/corpus.hpp"
#include "condra/tree.hpp"

namespace condra {

enum class Strategy {
  kConditional,      // pruned tree search through the conditional index
  kQueryThenFilter,  // unconditional search with geometric fan-out growth
  kReconfigured,     // brute force below a subset-size threshold, else qtf
  kBruteForce,
  kDedicated,        // tree built over the condition's points only
  kBatched,
};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

/// Conditional neighbors, ascending distance with ties broken by smaller id.
/// Holds min(k, |S|) entries, each satisfying the condition.
struct ResultList {
  std::vector<Neighbor> neighbors;
  std::size_t k = 0;
  std::string condition;
  Strategy strategy = Strategy::kConditional;
  SearchStats stats;
  // Query-then-filter: number of unconditional passes and the last fan-out.
  std::size_t passes = 0;
  std::size_t fanout = 0;
  // Reconfigured: the branch that ran.
  std::optional<Strategy> branch;

  std::vector<std::uint32_t> ids() const;
};

constexpr std::size_t kDefaultQtfInitial = 50;
constexpr std::size_t kDefaultQtfGrowth = 5;
constexpr std::size_t kDefaultReconfigThreshold = 2000;

struct CknnOptions {
  // Skip nodes outside the resolved node set. Disabling it keeps the leaf
  // predicate, so results are unchanged; only the visit counts grow.
  bool prune_nodes = true;
};

ResultList cknn_query(const Tree& tree, const CondIndex& index, const Corpus& corpus,
                      std::span<const float> query, const Condition& condition, std::size_t k,
                      NodeSetCache* cache = nullptr, CknnOptions options = {});
ResultList cknn_query(const Tree& tree, const Corpus& corpus, std::span<const float> query,
                      const ResolvedCondition& resolved, std::size_t k, CknnOptions options = {});

ResultList brute_force_cknn(const Corpus& corpus, std::span<const float> query,
                            const Condition& condition, std::size_t k);
ResultList brute_force_cknn(const Corpus& corpus, std::span<const float> query,
                            const IdSet& members, std::size_t k);

ResultList query_then_filter(const Tree& tree, const Corpus& corpus, std::span<const float> query,
                             const Condition& condition, std::size_t k,
                             std::size_t initial = kDefaultQtfInitial,
                             std::size_t growth = kDefaultQtfGrowth);
ResultList query_then_filter(const Tree& tree, const Corpus& corpus, std::span<const float> query,
                             const IdSet& members, std::size_t k,
                             std::size_t initial = kDefaultQtfInitial,
                             std::size_t growth = kDefaultQtfGrowth);

/// Brute force over the members when |S| < threshold, otherwise
/// query-then-filter. `branch` records the path taken.
ResultList reconfigured_query(const Tree& tree, const CondIndex& index, const Corpus& corpus,
                              std::span<const float> query, const Condition& condition,
                              std::size_t k, std::size_t threshold = kDefaultReconfigThreshold,
                              NodeSetCache* cache = nullptr);
ResultList reconfigured_query(const Tree& tree, const Corpus& corpus, std::span<const float> query,
                              const ResolvedCondition& resolved, std::size_t k,
                              std::size_t threshold = kDefaultReconfigThreshold);

/// Ball tree over exactly the condition's points. Throws kEmpty when the
/// condition matches nothing.
Tree build_dedicated(const Corpus& corpus, const Condition& condition, std::size_t leaf_size);
Tree build_dedicated(const Corpus& corpus, const IdSet& members, std::size_t leaf_size);
ResultList dedicated_query(const Tree& dedicated, const Corpus& corpus,
                           std::span<const float> query, std::size_t k);

/// Brute force for m queries (row-major m x d) against b conditions at once.
/// Distances for all queries come from one matrix product; the final ranking
/// is rescored with the exact kernel so every cell equals brute_force_cknn.
/// Result[i][j] is query i under condition j.
std::vector<std::vector<ResultList>> batched_brute_force(const Corpus& corpus,
                                                         std::span<const float> queries,
                                                         std::size_t m,
                                                         std::span<const Condition> conditions,
                                                         std::size_t k);
std::vector<std::vector<ResultList>> batched_brute_force(const Corpus& corpus,
                                                         std::span<const float> queries,
                                                         std::size_t m,
                                                         std::span<const IdSet> members,
                                                         std::size_t k);

}  // namespace condra
