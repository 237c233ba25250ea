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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "condra/condition.hpp"
#include "condra/corpus.hpp"
#include "condra/tree.hpp"

namespace condra::testing {

/// Random corpus with attributes `a` (a_values values, skewed) and `b`
/// (b_values values, uniform).
inline Corpus random_corpus(std::size_t n, std::size_t d, std::uint64_t seed,
                            Metric metric = Metric::kEuclidean, std::size_t a_values = 5,
                            std::size_t b_values = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> data(n * d);
  for (auto& v : data) v = normal(rng);
  std::geometric_distribution<std::size_t> skew(0.4);
  std::uniform_int_distribution<std::size_t> uniform(0, b_values - 1);
  std::vector<std::string> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = "a" + std::to_string(std::min(skew(rng), a_values - 1));
    b[i] = "b" + std::to_string(uniform(rng));
  }
  std::vector<Attribute> attrs;
  attrs.emplace_back("a", a);
  attrs.emplace_back("b", b);
  return Corpus(std::move(data), n, d, metric, std::move(attrs));
}

/// Corpus of small integer coordinates, so many distances tie exactly.
inline Corpus grid_corpus(std::size_t n, std::size_t d, int span, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(0, span);
  std::vector<float> data(n * d);
  for (auto& v : data) v = static_cast<float>(coord(rng));
  std::vector<std::string> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = (i % 3 == 0) ? "x" : "y";
  std::vector<Attribute> attrs;
  attrs.emplace_back("a", a);
  return Corpus(std::move(data), n, d, Metric::kEuclidean, std::move(attrs));
}

inline Corpus corpus_2d(const std::vector<std::pair<float, float>>& points,
                        const std::vector<std::string>& labels = {}) {
  std::vector<float> data;
  for (auto [x, y] : points) {
    data.push_back(x);
    data.push_back(y);
  }
  std::vector<Attribute> attrs;
  if (!labels.empty()) attrs.emplace_back("label", labels);
  return Corpus(std::move(data), points.size(), 2, Metric::kEuclidean, std::move(attrs));
}

/// Reference distance written independently of the library kernel.
inline double reference_distance(std::span<const float> a, std::span<const float> b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double t = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
    s += t * t;
  }
  return static_cast<double>(std::sqrt(s));
}

/// Exhaustive scan with a per-point predicate, ascending distance then id.
template <class Pred>
std::vector<Neighbor> scan_oracle(const Corpus& corpus, std::span<const float> query, std::size_t k,
                                  Pred&& keep) {
  std::vector<float> q(query.begin(), query.end());
  if (corpus.metric() == Metric::kAngular) {
    double norm = 0;
    for (float v : q) norm += double(v) * v;
    norm = std::sqrt(norm);
    for (auto& v : q) v = static_cast<float>(v / norm);
  }
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!keep(i)) continue;
    all.push_back({static_cast<std::uint32_t>(i), reference_distance(q, corpus.row(i))});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.id < y.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

inline std::vector<Neighbor> condition_oracle(const Corpus& corpus, std::span<const float> query,
                                              std::size_t k, const Condition& condition) {
  return scan_oracle(corpus, query, k,
                     [&](std::size_t i) { return matches(condition, corpus, i); });
}

inline std::vector<std::uint32_t> ids_of(const std::vector<Neighbor>& list) {
  std::vector<std::uint32_t> out;
  for (const auto& n : list) out.push_back(n.id);
  return out;
}

/// Ids equal and distances within `rel` relative tolerance.
inline bool same_neighbors(const std::vector<Neighbor>& got, const std::vector<Neighbor>& want,
                           double rel = 1e-5) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].id != want[i].id) return false;
    const double scale = std::max(1.0, std::abs(want[i].distance));
    if (std::abs(got[i].distance - want[i].distance) > rel * scale) return false;
  }
  return true;
}

/// Random condition over the corpus facets: terms, restricted NOT, AND, OR
/// and occasionally ALL or an unknown value.
inline Condition random_condition(const Corpus& corpus, std::mt19937_64& rng, int depth = 2) {
  const auto names = corpus.facet_names();
  auto term = [&]() {
    const auto& attr = corpus.attribute(names[rng() % names.size()]);
    if (rng() % 20 == 0) return Condition::term(attr.name(), "missing");
    return Condition::term(attr.name(), std::string(attr.values()[rng() % attr.cardinality()]));
  };
  const auto pick = rng() % 10;
  if (depth == 0 || pick < 3) {
    if (rng() % 25 == 0) return Condition::all();
    return term();
  }
  if (pick < 5) {
    const auto& attr = corpus.attribute(names[rng() % names.size()]);
    std::vector<Condition> terms;
    const std::size_t m = 1 + rng() % 2;
    for (std::size_t i = 0; i < m; ++i) {
      terms.push_back(
          Condition::term(attr.name(), std::string(attr.values()[rng() % attr.cardinality()])));
    }
    return Condition::negate(Condition::disjunction(std::move(terms)));
  }
  std::vector<Condition> ops;
  const std::size_t m = 2 + rng() % 2;
  for (std::size_t i = 0; i < m; ++i) ops.push_back(random_condition(corpus, rng, depth - 1));
  return pick < 8 ? Condition::conjunction(std::move(ops)) : Condition::disjunction(std::move(ops));
}

/// Random query vector with the corpus dimension.
inline std::vector<float> random_query(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> q(d);
  for (auto& v : q) v = normal(rng);
  return q;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("condra_test_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace condra::testing
