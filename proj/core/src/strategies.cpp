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

#include "condra/strategies.hpp"

#include <algorithm>
#include <cmath>

#include "condra/error.hpp"
#include "search.hpp"

namespace condra {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kConditional: return "cond";
    case Strategy::kQueryThenFilter: return "qtf";
    case Strategy::kReconfigured: return "reconf";
    case Strategy::kBruteForce: return "brute";
    case Strategy::kDedicated: return "dedicated";
    case Strategy::kBatched: return "batched";
  }
  return "cond";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "cond" || text == "conditional") return Strategy::kConditional;
  if (text == "qtf") return Strategy::kQueryThenFilter;
  if (text == "reconf") return Strategy::kReconfigured;
  if (text == "brute") return Strategy::kBruteForce;
  if (text == "dedicated") return Strategy::kDedicated;
  if (text == "batched") return Strategy::kBatched;
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(text) + "'");
}

std::vector<std::uint32_t> ResultList::ids() const {
  std::vector<std::uint32_t> out;
  out.reserve(neighbors.size());
  for (const auto& n : neighbors) out.push_back(n.id);
  return out;
}

namespace {

void check_k(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
}

void check_members(const Corpus& corpus, const IdSet& members) {
  if (members.size() != corpus.size()) {
    throw Error(ErrorCode::kMismatch, "member set does not belong to this corpus");
  }
}

}  // namespace

ResultList cknn_query(const Tree& tree, const CondIndex& index, const Corpus& corpus,
                      std::span<const float> query, const Condition& condition, std::size_t k,
                      NodeSetCache* cache, CknnOptions options) {
  index.check_bound(tree, corpus);
  auto resolved = resolve_node_set(index, corpus, condition, cache);
  auto out = cknn_query(tree, corpus, query, *resolved, k, options);
  out.condition = condition.to_string();
  return out;
}

ResultList cknn_query(const Tree& tree, const Corpus& corpus, std::span<const float> query,
                      const ResolvedCondition& resolved, std::size_t k, CknnOptions options) {
  tree.check_corpus(corpus);
  check_k(k);
  check_members(corpus, resolved.members);
  if (resolved.nodes.size() != tree.node_count()) {
    throw Error(ErrorCode::kMismatch, "node set does not belong to this tree");
  }
  const auto q = prepare_query(corpus, query);
  ResultList out;
  out.k = k;
  out.condition = resolved.canonical;
  out.strategy = Strategy::kConditional;
  detail::KBest best(k);
  const IdSet& members = resolved.members;
  const NodeSet& nodes = resolved.nodes;
  if (options.prune_nodes) {
    detail::tree_search(
        tree, corpus, q, best, [&](std::size_t n) { return nodes.test(n); },
        [&](std::uint32_t p) { return members.test(p); }, out.stats);
  } else {
    detail::tree_search(
        tree, corpus, q, best, [](std::size_t) { return true; },
        [&](std::uint32_t p) { return members.test(p); }, out.stats);
  }
  out.neighbors = best.sorted();
  return out;
}

ResultList brute_force_cknn(const Corpus& corpus, std::span<const float> query,
                            const Condition& condition, std::size_t k) {
  auto out = brute_force_cknn(corpus, query, condition_members(condition, corpus), k);
  out.condition = condition.to_string();
  return out;
}

ResultList brute_force_cknn(const Corpus& corpus, std::span<const float> query,
                            const IdSet& members, std::size_t k) {
  check_k(k);
  check_members(corpus, members);
  const auto q = prepare_query(corpus, query);
  ResultList out;
  out.k = k;
  out.strategy = Strategy::kBruteForce;
  detail::KBest best(k);
  members.for_each([&](std::size_t p) {
    best.offer(squared_l2(q, corpus.row(p)), static_cast<std::uint32_t>(p));
  });
  out.stats.points_scored = members.count();
  out.neighbors = best.sorted();
  return out;
}

ResultList query_then_filter(const Tree& tree, const Corpus& corpus, std::span<const float> query,
                             const Condition& condition, std::size_t k, std::size_t initial,
                             std::size_t growth) {
  auto out = query_then_filter(tree, corpus, query, condition_members(condition, corpus), k,
                               initial, growth);
  out.condition = condition.to_string();
  return out;
}

ResultList query_then_filter(const Tree& tree, const Corpus& corpus, std::span<const float> query,
                             const IdSet& members, std::size_t k, std::size_t initial,
                             std::size_t growth) {
  tree.check_corpus(corpus);
  check_k(k);
  check_members(corpus, members);
  if (initial == 0 || growth < 2) {
    throw Error(ErrorCode::kInvalidArgument, "query-then-filter needs initial >= 1 and growth >= 2");
  }
  const auto q = prepare_query(corpus, query);
  const std::size_t n = tree.size();
  ResultList out;
  out.k = k;
  out.strategy = Strategy::kQueryThenFilter;
  thread_local detail::DistanceMemo memo;
  memo.reset(corpus.size());
  std::size_t fanout = initial;
  while (fanout < n) {
    detail::KBest best(fanout);
    SearchStats pass;
    detail::tree_search(
        tree, corpus, q, best, [](std::size_t) { return true; },
        [](std::uint32_t) { return true; }, pass, &memo);
    out.stats.nodes_visited += pass.nodes_visited;
    out.stats.points_scored += pass.points_scored;
    ++out.passes;
    out.fanout = fanout;
    // The first k members of the sorted fan-out are the k smallest members
    // of the unsorted fan-out, so only the survivors need ordering.
    auto kept = best.unordered();
    kept.erase(std::remove_if(kept.begin(), kept.end(),
                              [&](const auto& e) { return !members.test(e.second); }),
               kept.end());
    const std::size_t take = std::min(k, kept.size());
    std::partial_sort(kept.begin(), kept.begin() + take, kept.end());
    out.neighbors.clear();
    for (std::size_t i = 0; i < take; ++i) {
      out.neighbors.push_back({kept[i].second, std::sqrt(kept[i].first)});
    }
    if (out.neighbors.size() >= k) return out;
    fanout = fanout > n / growth ? n : fanout * growth;
  }
  // A fan-out covering the whole corpus returns every point, so filtering it
  // leaves exactly the members; score those directly.
  detail::KBest best(k);
  members.for_each([&](std::size_t p) {
    const auto id = static_cast<std::uint32_t>(p);
    double sq = 0.0;
    if (!memo.find(id, sq)) {
      sq = squared_l2(q, corpus.row(p));
      ++out.stats.points_scored;
    }
    best.offer(sq, id);
  });
  ++out.passes;
  out.fanout = n;
  out.neighbors = best.sorted();
  return out;
}

ResultList reconfigured_query(const Tree& tree, const CondIndex& index, const Corpus& corpus,
                              std::span<const float> query, const Condition& condition,
                              std::size_t k, std::size_t threshold, NodeSetCache* cache) {
  index.check_bound(tree, corpus);
  auto resolved = resolve_node_set(index, corpus, condition, cache);
  auto out = reconfigured_query(tree, corpus, query, *resolved, k, threshold);
  out.condition = condition.to_string();
  return out;
}

ResultList reconfigured_query(const Tree& tree, const Corpus& corpus, std::span<const float> query,
                              const ResolvedCondition& resolved, std::size_t k,
                              std::size_t threshold) {
  const std::size_t size = resolved.members.count();
  ResultList out = size < threshold
                       ? brute_force_cknn(corpus, query, resolved.members, k)
                       : query_then_filter(tree, corpus, query, resolved.members, k);
  out.branch = out.strategy;
  out.strategy = Strategy::kReconfigured;
  out.condition = resolved.canonical;
  return out;
}

Tree build_dedicated(const Corpus& corpus, const Condition& condition, std::size_t leaf_size) {
  return build_dedicated(corpus, condition_members(condition, corpus), leaf_size);
}

Tree build_dedicated(const Corpus& corpus, const IdSet& members, std::size_t leaf_size) {
  check_members(corpus, members);
  if (members.none()) throw Error(ErrorCode::kEmpty, "condition matches no points");
  const auto ids = members.to_ids();
  return build_ball_tree(corpus, leaf_size, ids);
}

ResultList dedicated_query(const Tree& dedicated, const Corpus& corpus,
                           std::span<const float> query, std::size_t k) {
  ResultList out;
  out.k = k;
  out.strategy = Strategy::kDedicated;
  out.neighbors = knn_query(dedicated, corpus, query, k, &out.stats);
  return out;
}

}  // namespace condra
