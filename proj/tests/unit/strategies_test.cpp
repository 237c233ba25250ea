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

#include <gtest/gtest.h>

#include <random>

#include "condra/cond_index.hpp"
#include "condra/error.hpp"
#include "condra/strategies.hpp"
#include "fixtures.hpp"

namespace condra {
namespace {

struct Fixture {
  Corpus corpus;
  Tree tree;
  CondIndex index;
  explicit Fixture(Corpus c, std::size_t leaf = 8)
      : corpus(std::move(c)), tree(build_ball_tree(corpus, leaf)),
        index(build_cond_index(tree, corpus)) {}
};

Fixture two_groups() {
  return Fixture(testing::corpus_2d({{0, 0}, {1, 0}, {10, 0}, {11, 0}}, {"A", "A", "B", "B"}), 1);
}

TEST(CknnQuery, ForcedGeometry) {
  auto f = two_groups();
  const float q[] = {0.2f, 0.0f};
  auto b = cknn_query(f.tree, f.index, f.corpus, q, parse_condition(R"(label="B")"), 1);
  ASSERT_EQ(b.neighbors.size(), 1u);
  EXPECT_EQ(b.neighbors[0].id, 2u);
  EXPECT_NEAR(b.neighbors[0].distance, 9.8, 1e-6);
  EXPECT_EQ(b.condition, R"(label="B")");
  EXPECT_EQ(b.k, 1u);
  auto a = cknn_query(f.tree, f.index, f.corpus, q, parse_condition(R"(label="A")"), 1);
  EXPECT_EQ(a.neighbors[0].id, 0u);
  EXPECT_NEAR(a.neighbors[0].distance, 0.2, 1e-6);
}

TEST(CknnQuery, EmptyAndOversizedConditions) {
  auto f = two_groups();
  const float q[] = {0.0f, 0.0f};
  auto none = cknn_query(f.tree, f.index, f.corpus, q, parse_condition(R"(label="Z")"), 3);
  EXPECT_TRUE(none.neighbors.empty());
  auto few = cknn_query(f.tree, f.index, f.corpus, q, parse_condition(R"(label="B")"), 10);
  EXPECT_EQ(few.ids(), (std::vector<std::uint32_t>{2, 3}));
}

TEST(CknnQuery, Errors) {
  auto f = two_groups();
  const float bad[] = {0.0f, 0.0f, 0.0f};
  const float q[] = {0.0f, 0.0f};
  EXPECT_THROW(cknn_query(f.tree, f.index, f.corpus, bad, Condition::all(), 1), Error);
  EXPECT_THROW(cknn_query(f.tree, f.index, f.corpus, q, Condition::all(), 0), Error);
  EXPECT_THROW(cknn_query(f.tree, f.index, f.corpus, q, parse_condition(R"(x="1")"), 1), Error);
  auto other = testing::corpus_2d({{0, 0}, {1, 0}, {10, 0}, {12, 0}}, {"A", "A", "B", "B"});
  EXPECT_THROW(cknn_query(f.tree, f.index, other, q, Condition::all(), 1), Error);
}

TEST(BruteForce, AllIsUnconditional) {
  auto f = Fixture(testing::random_corpus(500, 4, 2));
  std::mt19937_64 rng(1);
  auto q = testing::random_query(4, rng);
  auto all = brute_force_cknn(f.corpus, q, Condition::all(), 7);
  auto knn = knn_query(f.tree, f.corpus, q, 7);
  EXPECT_EQ(all.neighbors, knn);
  EXPECT_EQ(all.stats.points_scored, 500u);
  EXPECT_TRUE(brute_force_cknn(f.corpus, q, parse_condition(R"(a="none")"), 7).neighbors.empty());
}

TEST(QueryThenFilter, SinglePassWhenConditionIsDense) {
  auto f = Fixture(testing::random_corpus(2000, 3, 3, Metric::kEuclidean, 2, 2));
  auto q = f.corpus.row(5);
  auto r = query_then_filter(f.tree, f.corpus, q, parse_condition(R"(b="b0" OR b="b1")"), 1);
  EXPECT_EQ(r.passes, 1u);
  EXPECT_EQ(r.fanout, kDefaultQtfInitial);
}

TEST(QueryThenFilter, EscalatesGeometrically) {
  // 300 points on a line; the only member is the farthest one.
  std::vector<std::pair<float, float>> pts;
  std::vector<std::string> labels;
  for (int i = 0; i < 300; ++i) {
    pts.push_back({float(i), 0});
    labels.push_back(i == 299 ? "far" : "near");
  }
  auto f = Fixture(testing::corpus_2d(pts, labels), 4);
  const float q[] = {0.0f, 0.0f};
  auto r = query_then_filter(f.tree, f.corpus, q, parse_condition(R"(label="far")"), 1, 50, 5);
  EXPECT_EQ(r.passes, 3u);  // 50, 250, then the whole corpus
  EXPECT_EQ(r.ids(), std::vector<std::uint32_t>{299});
  auto first = query_then_filter(f.tree, f.corpus, q, parse_condition(R"(label="far")"), 1, 50, 5);
  EXPECT_EQ(first.neighbors, r.neighbors);

  // The member at rank 200 is found by the second pass (fan-out 250).
  labels.assign(300, "near");
  labels[200] = "mid";
  auto g = Fixture(testing::corpus_2d(pts, labels), 4);
  auto s = query_then_filter(g.tree, g.corpus, q, parse_condition(R"(label="mid")"), 1, 50, 5);
  EXPECT_EQ(s.passes, 2u);
  EXPECT_EQ(s.fanout, 250u);

  auto none = query_then_filter(f.tree, f.corpus, q, parse_condition(R"(label="zzz")"), 3);
  EXPECT_TRUE(none.neighbors.empty());
  EXPECT_GE(none.fanout, f.corpus.size());
  EXPECT_THROW(query_then_filter(f.tree, f.corpus, q, Condition::all(), 1, 0, 5), Error);
  EXPECT_THROW(query_then_filter(f.tree, f.corpus, q, Condition::all(), 1, 50, 1), Error);
}

TEST(Reconfigured, BranchFollowsThreshold) {
  auto f = Fixture(testing::random_corpus(1000, 3, 7));
  std::mt19937_64 rng(3);
  auto q = testing::random_query(3, rng);
  auto cond = parse_condition(R"(a="a2")");
  const auto size = condition_members(cond, f.corpus).count();
  ASSERT_GT(size, 10u);
  auto small = reconfigured_query(f.tree, f.index, f.corpus, q, cond, 5, size + 1);
  EXPECT_EQ(small.strategy, Strategy::kReconfigured);
  EXPECT_EQ(small.branch, Strategy::kBruteForce);
  auto large = reconfigured_query(f.tree, f.index, f.corpus, q, Condition::all(), 5, 0);
  EXPECT_EQ(large.branch, Strategy::kQueryThenFilter);
  auto want = brute_force_cknn(f.corpus, q, cond, 5).neighbors;
  for (std::size_t threshold : {0ul, 1ul, 10ul, size, size + 1, 100000ul}) {
    EXPECT_EQ(reconfigured_query(f.tree, f.index, f.corpus, q, cond, 5, threshold).neighbors,
              want);
  }
}

TEST(Dedicated, Basics) {
  auto f = Fixture(testing::random_corpus(1200, 3, 8));
  auto full = build_dedicated(f.corpus, Condition::all(), 8);
  EXPECT_TRUE(full == f.tree);
  auto cond = parse_condition(R"(b="b1")");
  const auto members = condition_members(cond, f.corpus);
  auto ded = build_dedicated(f.corpus, cond, 8);
  EXPECT_EQ(ded.size(), members.count());
  EXPECT_LE(ded.node_count(), 2 * (members.count() + 7) / 8);
  for (auto p : ded.point_order()) EXPECT_TRUE(members.test(p));
  EXPECT_THROW(build_dedicated(f.corpus, parse_condition(R"(b="none")"), 8), Error);
}

TEST(Strategies, AllAgreeWithOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 50 + rng() % 2000, d = 1 + rng() % 16;
    const Metric m = trial % 2 ? Metric::kAngular : Metric::kEuclidean;
    auto f = Fixture(testing::random_corpus(n, d, rng(), m, 2 + rng() % 8, 2 + rng() % 5),
                     1 + rng() % 40);
    NodeSetCache cache;
    for (int c = 0; c < 8; ++c) {
      auto cond = testing::random_condition(f.corpus, rng, 2);
      auto q = testing::random_query(d, rng);
      const std::size_t k = 1 + rng() % 20;
      auto want = testing::condition_oracle(f.corpus, q, k, cond);
      auto check = [&](const ResultList& r, const char* what) {
        EXPECT_TRUE(testing::same_neighbors(r.neighbors, want))
            << what << " trial " << trial << " " << cond.to_string();
        for (const auto& nb : r.neighbors) EXPECT_TRUE(matches(cond, f.corpus, nb.id));
      };
      check(cknn_query(f.tree, f.index, f.corpus, q, cond, k, &cache), "cknn");
      check(brute_force_cknn(f.corpus, q, cond, k), "brute");
      check(query_then_filter(f.tree, f.corpus, q, cond, k), "qtf");
      check(reconfigured_query(f.tree, f.index, f.corpus, q, cond, k, rng() % n, &cache), "reconf");
      if (!condition_members(cond, f.corpus).none()) {
        check(dedicated_query(build_dedicated(f.corpus, cond, 1 + rng() % 20), f.corpus, q, k),
              "dedicated");
      }
      std::vector<Condition> conds{cond};
      check(batched_brute_force(f.corpus, q, 1, conds, k)[0][0], "batched");
    }
  }
}

TEST(Strategies, ExactTiesOnGrid) {
  auto f = Fixture(testing::grid_corpus(800, 2, 3, 4), 5);
  std::mt19937_64 rng(6);
  for (const char* text : {R"(a="x")", R"(a="y")", "ALL"}) {
    auto cond = parse_condition(text);
    for (int i = 0; i < 30; ++i) {
      const auto row = f.corpus.row(rng() % f.corpus.size());
      std::vector<float> q(row.begin(), row.end());
      auto want = testing::ids_of(testing::condition_oracle(f.corpus, q, 25, cond));
      EXPECT_EQ(cknn_query(f.tree, f.index, f.corpus, q, cond, 25).ids(), want);
      EXPECT_EQ(query_then_filter(f.tree, f.corpus, q, cond, 25).ids(), want);
      EXPECT_EQ(brute_force_cknn(f.corpus, q, cond, 25).ids(), want);
      EXPECT_EQ(dedicated_query(build_dedicated(f.corpus, cond, 3), f.corpus, q, 25).ids(), want);
    }
  }
}

TEST(CknnQuery, VisitBounds) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    auto f = Fixture(testing::random_corpus(500 + rng() % 3000, 4, rng()), 1 + rng() % 30);
    for (int c = 0; c < 10; ++c) {
      auto cond = testing::random_condition(f.corpus, rng, 2);
      auto resolved = resolve_node_set(f.index, f.corpus, cond);
      auto q = testing::random_query(4, rng);
      auto pruned = cknn_query(f.tree, f.corpus, q, *resolved, 10);
      auto unpruned = cknn_query(f.tree, f.corpus, q, *resolved, 10, CknnOptions{false});
      EXPECT_LE(pruned.stats.nodes_visited, resolved->nodes.count());
      EXPECT_LE(pruned.stats.nodes_visited, unpruned.stats.nodes_visited);
      EXPECT_EQ(pruned.neighbors, unpruned.neighbors);
    }
  }
}

TEST(CknnQuery, AllMatchesUnconditionalSearch) {
  auto f = Fixture(testing::random_corpus(3000, 8, 1), 16);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 40; ++i) {
    auto q = testing::random_query(8, rng);
    SearchStats stats;
    auto knn = knn_query(f.tree, f.corpus, q, 10, &stats);
    auto r = cknn_query(f.tree, f.index, f.corpus, q, Condition::all(), 10);
    EXPECT_EQ(r.neighbors, knn);
    EXPECT_EQ(r.stats.nodes_visited, stats.nodes_visited);
  }
}

TEST(Batched, GridEqualsPerCellOracle) {
  std::mt19937_64 rng(5);
  for (Metric m : {Metric::kEuclidean, Metric::kAngular}) {
    auto corpus = testing::random_corpus(1500, 12, 3, m);
    std::vector<Condition> conds;
    for (int i = 0; i < 6; ++i) conds.push_back(testing::random_condition(corpus, rng, 2));
    const std::size_t queries = 9;
    std::vector<float> qs;
    for (std::size_t i = 0; i < queries; ++i) {
      auto q = testing::random_query(12, rng);
      qs.insert(qs.end(), q.begin(), q.end());
    }
    auto grid = batched_brute_force(corpus, qs, queries, conds, 8);
    ASSERT_EQ(grid.size(), queries);
    for (std::size_t i = 0; i < queries; ++i) {
      ASSERT_EQ(grid[i].size(), conds.size());
      std::span<const float> q(qs.data() + i * 12, 12);
      for (std::size_t j = 0; j < conds.size(); ++j) {
        EXPECT_EQ(grid[i][j].strategy, Strategy::kBatched);
        EXPECT_TRUE(testing::same_neighbors(grid[i][j].neighbors,
                                            testing::condition_oracle(corpus, q, 8, conds[j])));
      }
    }
  }
}

TEST(Batched, PartitionCoversEveryPoint) {
  auto corpus = testing::random_corpus(300, 3, 8);
  std::vector<Condition> parts;
  for (const auto& v : corpus.attribute("b").values()) parts.push_back(Condition::term("b", v));
  std::mt19937_64 rng(1);
  auto q = testing::random_query(3, rng);
  auto grid = batched_brute_force(corpus, q, 1, parts, corpus.size());
  std::vector<int> seen(corpus.size(), 0);
  for (const auto& cell : grid[0]) {
    for (auto id : cell.ids()) ++seen[id];
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  const float bad[] = {1.0f};
  EXPECT_THROW(batched_brute_force(corpus, bad, 1, parts, 1), Error);
}

TEST(StrategyNames, RoundTrip) {
  for (auto s : {Strategy::kConditional, Strategy::kQueryThenFilter, Strategy::kReconfigured,
                 Strategy::kBruteForce, Strategy::kDedicated, Strategy::kBatched}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_EQ(parse_strategy("cond"), Strategy::kConditional);
  EXPECT_THROW(parse_strategy("fastest"), Error);
}

}  // namespace
}  // namespace condra
