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

#include "condra/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "condra/error.hpp"
#include "json.hpp"

namespace condra {

using json = nlohmann::ordered_json;

std::vector<double> default_condition_fractions() {
  return {0.0005, 0.005, 0.01, 0.1, 0.3, 1.0};
}

std::vector<ConditionSpec> clustered_condition_specs(std::size_t labels, std::size_t buckets,
                                                     const std::vector<double>& fractions) {
  if (labels == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one label");
  std::vector<ConditionSpec> specs;
  std::size_t next = 0;  // labels are handed out without reuse while they last
  for (double f : fractions) {
    if (!(f > 0.0)) throw Error(ErrorCode::kInvalidArgument, "fractions must be positive");
    std::ostringstream name;
    name << f * 100.0 << "%";
    const double want = f * static_cast<double>(labels);
    if (f >= 1.0 || want >= static_cast<double>(labels)) {
      specs.push_back({name.str(), Condition::all()});
      continue;
    }
    const auto label = [&](std::size_t i) { return "l" + std::to_string(i % labels); };
    if (want < 0.5) {
      if (buckets < 2) throw Error(ErrorCode::kInvalidArgument, "fraction below one label needs buckets");
      specs.push_back({name.str(), Condition::conjunction({Condition::term("label", label(next++)),
                                                          Condition::term("bucket", "b0")})});
      continue;
    }
    const auto m = static_cast<std::size_t>(std::llround(want));
    std::vector<Condition> terms;
    for (std::size_t i = 0; i < m; ++i) terms.push_back(Condition::term("label", label(next++)));
    specs.push_back({name.str(), Condition::disjunction(std::move(terms))});
  }
  return specs;
}

const BenchRow* BenchReport::find(Strategy s, const std::string& condition) const {
  for (const auto& r : rows) {
    if (r.strategy == s && r.condition == condition) return &r;
  }
  return nullptr;
}

bool BenchReport::all_exact() const {
  return std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.exact; });
}

namespace {

using Clock = std::chrono::steady_clock;

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

double p90_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

bool same_result(const ResultList& a, const ResultList& b) {
  if (a.neighbors.size() != b.neighbors.size()) return false;
  for (std::size_t i = 0; i < a.neighbors.size(); ++i) {
    const auto& x = a.neighbors[i];
    const auto& y = b.neighbors[i];
    if (x.id != y.id) return false;
    if (std::abs(x.distance - y.distance) > 1e-5 * std::max(1.0, std::abs(y.distance))) return false;
  }
  return true;
}

[[noreturn]] void fail_with_instance(Strategy s, const ConditionSpec& spec, std::size_t k,
                                     std::uint32_t query_id, const ResultList* expected,
                                     const ResultList* got, const std::string& what) {
  json j;
  j["strategy"] = std::string(to_string(s));
  j["condition"] = spec.condition.to_string();
  j["k"] = k;
  j["query_point"] = query_id;
  if (expected) j["expected"] = expected->ids();
  if (got) j["got"] = got->ids();
  j["error"] = what;
  throw Error(ErrorCode::kConsistency, "benchmark instance failed: " + j.dump());
}

struct Cell {
  std::vector<double> latencies;  // per-query medians, milliseconds
  double nodes = 0.0;
  double points = 0.0;
  std::size_t checked = 0;
  std::size_t brute_branch = 0;
};

}  // namespace

BenchReport run_speed_benchmark(const Corpus& corpus, const std::vector<ConditionSpec>& specs,
                                const SpeedOptions& options) {
  if (specs.empty()) throw Error(ErrorCode::kInvalidArgument, "no conditions to benchmark");
  if (options.queries == 0 || options.repetitions == 0 || options.k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "queries, repetitions and k must be >= 1");
  }
  const std::size_t n = corpus.size();
  const Tree tree = build_ball_tree(corpus, options.leaf_size);
  const CondIndex index = build_cond_index(tree, corpus);
  NodeSetCache cache;

  std::vector<std::shared_ptr<const ResolvedCondition>> resolved;
  std::vector<std::optional<Tree>> dedicated(specs.size());
  const bool want_dedicated = std::count(options.strategies.begin(), options.strategies.end(),
                                          Strategy::kDedicated) > 0;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    resolved.push_back(resolve_node_set(index, corpus, specs[c].condition, &cache));
    if (resolved.back()->members.none()) {
      throw Error(ErrorCode::kEmpty, "condition '" + specs[c].name + "' matches no points");
    }
    if (want_dedicated) dedicated[c] = build_dedicated(corpus, resolved.back()->members, options.leaf_size);
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::uint32_t> all_ids(n);
  std::iota(all_ids.begin(), all_ids.end(), 0u);
  std::vector<std::uint32_t> query_ids;
  std::sample(all_ids.begin(), all_ids.end(), std::back_inserter(query_ids),
              std::min(options.queries, n), rng);
  std::shuffle(query_ids.begin(), query_ids.end(), rng);
  std::vector<bool> sampled(query_ids.size(), false);
  {
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(options.exact_sample * double(query_ids.size()))));
    for (std::size_t i = 0; i < std::min(count, query_ids.size()); ++i) sampled[i] = true;
  }

  BenchReport report;
  report.n = n;
  report.d = corpus.dim();
  report.leaf_size = options.leaf_size;
  report.metric = corpus.metric();
  report.repetitions = options.repetitions;
  report.warmup = std::min(options.warmup, query_ids.size());
  report.queries = query_ids.size();
  report.k = options.k;
  report.seed = options.seed;
  report.reconfig_threshold = options.reconfig_threshold;

  auto run_one = [&](Strategy s, std::size_t c, std::span<const float> q) -> ResultList {
    const auto& spec = specs[c];
    switch (s) {
      case Strategy::kConditional:
        return cknn_query(tree, index, corpus, q, spec.condition, options.k, &cache);
      case Strategy::kQueryThenFilter:
        return query_then_filter(tree, corpus, q, resolved[c]->members, options.k);
      case Strategy::kReconfigured:
        return reconfigured_query(tree, index, corpus, q, spec.condition, options.k,
                                  report.reconfig_threshold, &cache);
      case Strategy::kBruteForce:
        return brute_force_cknn(corpus, q, resolved[c]->members, options.k);
      case Strategy::kDedicated:
        return dedicated_query(*dedicated[c], corpus, q, options.k);
      case Strategy::kBatched: {
        const IdSet* members = &resolved[c]->members;
        return batched_brute_force(corpus, q, 1, std::span<const IdSet>(members, 1), options.k)[0][0];
      }
    }
    throw Error(ErrorCode::kInvalidArgument, "unsupported strategy");
  };

  auto time_cell = [&](Strategy s, std::size_t c) {
    for (std::size_t i = 0; i < report.warmup; ++i) (void)run_one(s, c, corpus.row(query_ids[i]));
    Cell cell;
    std::vector<double> reps(options.repetitions);
    for (std::size_t i = 0; i < query_ids.size(); ++i) {
      const auto q = corpus.row(query_ids[i]);
      ResultList last;
      for (std::size_t r = 0; r < options.repetitions; ++r) {
        const auto t0 = Clock::now();
        ResultList res;
        try {
          res = run_one(s, c, q);
        } catch (const std::exception& e) {
          fail_with_instance(s, specs[c], options.k, query_ids[i], nullptr, nullptr, e.what());
        }
        reps[r] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        last = std::move(res);
      }
      cell.latencies.push_back(median_of(reps));
      cell.nodes += double(last.stats.nodes_visited);
      cell.points += double(last.stats.points_scored);
      if (last.branch == Strategy::kBruteForce) ++cell.brute_branch;
      if (sampled[i]) {
        const auto expected = brute_force_cknn(corpus, q, resolved[c]->members, options.k);
        if (!same_result(expected, last)) {
          fail_with_instance(s, specs[c], options.k, query_ids[i], &expected, &last,
                             "result differs from brute force");
        }
        ++cell.checked;
      }
    }
    BenchRow row;
    row.strategy = s;
    row.condition = specs[c].name;
    row.expression = specs[c].condition.to_string();
    row.members = resolved[c]->members.count();
    row.fraction = double(row.members) / double(n);
    row.bucket = static_cast<int>(std::floor(std::log10(row.fraction) + 1e-9));
    row.median_ms = median_of(cell.latencies);
    row.p90_ms = p90_of(cell.latencies);
    row.mean_nodes_visited = cell.nodes / double(query_ids.size());
    row.mean_points_scored = cell.points / double(query_ids.size());
    row.exact_checked = cell.checked;
    row.exact = true;
    row.brute_branch = cell.brute_branch;
    report.rows.push_back(row);
  };

  std::vector<Strategy> order = {Strategy::kBruteForce};
  auto wants = [&](Strategy s) {
    return std::find(options.strategies.begin(), options.strategies.end(), s) !=
           options.strategies.end();
  };
  const bool calibrate = wants(Strategy::kReconfigured) && options.calibrate;
  for (auto s : {Strategy::kQueryThenFilter, Strategy::kConditional, Strategy::kDedicated,
                 Strategy::kBatched}) {
    if (wants(s) || (s == Strategy::kQueryThenFilter && calibrate)) order.push_back(s);
  }
  for (auto s : order) {
    for (std::size_t c = 0; c < specs.size(); ++c) time_cell(s, c);
  }
  if (wants(Strategy::kReconfigured)) {
    if (calibrate) {
      report.reconfig_threshold = calibrate_threshold(report);
      report.calibrated = true;
    }
    for (std::size_t c = 0; c < specs.size(); ++c) time_cell(Strategy::kReconfigured, c);
  }

  for (auto& row : report.rows) {
    const BenchRow* base = report.find(Strategy::kBruteForce, row.condition);
    row.speedup = row.median_ms > 0.0 ? base->median_ms / row.median_ms : 1.0;
  }

  {
    for (std::size_t i = 0; i < report.warmup; ++i) {
      (void)knn_query(tree, corpus, corpus.row(query_ids[i]), options.k);
    }
    std::vector<double> lat, reps(options.repetitions);
    for (auto id : query_ids) {
      for (std::size_t r = 0; r < options.repetitions; ++r) {
        const auto t0 = Clock::now();
        (void)knn_query(tree, corpus, corpus.row(id), options.k);
        reps[r] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      }
      lat.push_back(median_of(reps));
    }
    report.unconditional_median_ms = median_of(lat);
  }
  return report;
}

std::size_t calibrate_threshold(const BenchReport& report) {
  struct Entry {
    std::size_t members;
    double brute;
    double qtf;
  };
  std::vector<Entry> entries;
  for (const auto& row : report.rows) {
    if (row.strategy != Strategy::kBruteForce) continue;
    const BenchRow* qtf = report.find(Strategy::kQueryThenFilter, row.condition);
    if (!qtf) throw Error(ErrorCode::kInvalidArgument, "calibration needs qtf rows");
    entries.push_back({row.members, row.median_ms, qtf->median_ms});
  }
  if (entries.empty()) throw Error(ErrorCode::kInvalidArgument, "calibration needs brute rows");
  std::vector<std::size_t> candidates = {1};
  for (const auto& e : entries) candidates.push_back(e.members + 1);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::size_t best = candidates.front();
  double best_worst = INFINITY, best_sum = INFINITY;
  for (auto t : candidates) {
    double worst = 0.0, sum = 0.0;
    for (const auto& e : entries) {
      const double chosen = e.members < t ? e.brute : e.qtf;
      const double floor_ms = std::max(std::min(e.brute, e.qtf), 1e-9);
      worst = std::max(worst, chosen / floor_ms);
      sum += chosen / floor_ms;
    }
    if (worst < best_worst - 1e-12 || (std::abs(worst - best_worst) <= 1e-12 && sum < best_sum)) {
      best = t;
      best_worst = worst;
      best_sum = sum;
    }
  }
  return best;
}

MemoryTable model_memory(std::size_t n, std::size_t d, std::size_t leaf_size, std::size_t values) {
  if (leaf_size == 0) throw Error(ErrorCode::kInvalidArgument, "leaf_size must be >= 1");
  MemoryTable t;
  t.n = n;
  t.d = d;
  t.leaf_size = leaf_size;
  t.node_bound = 2 * n / leaf_size;
  t.node_count = t.node_bound;
  t.node_bound_ok = true;
  t.indexed_values = values;
  t.data_bytes = n * d * 4;
  t.centroid_bytes = t.node_count * d * 4;
  t.index_bit_bytes = values * t.node_count / 8;
  t.data_bytes_64 = n * d * 8;
  t.centroid_bytes_64 = t.node_count * d * 8;
  t.index_entry_bytes_64 = values * t.node_count * 8;
  return t;
}

MemoryTable measure_memory(const Tree& tree, const CondIndex& index, const Corpus& corpus) {
  index.check_bound(tree, corpus);
  MemoryTable t = model_memory(corpus.size(), corpus.dim(), tree.leaf_size(), index.value_count());
  t.node_count = tree.node_count();
  t.node_bound_ok = t.node_count <= t.node_bound;
  t.centroid_bytes = t.node_count * t.d * 4;
  t.index_bit_bytes = t.indexed_values * t.node_count / 8;
  t.centroid_bytes_64 = t.node_count * t.d * 8;
  t.index_entry_bytes_64 = t.indexed_values * t.node_count * 8;
  t.data_bytes = 16 + corpus.size() * corpus.dim() * sizeof(float);  // vectors.bin
  std::ostringstream tree_out, index_out;
  write_tree(tree, tree_out);
  write_cond_index(index, index_out);
  t.tree_bytes = tree_out.str().size();
  t.index_bytes = index_out.str().size();
  return t;
}

AccuracyTable accuracy_at_n(const Corpus& corpus, const std::vector<std::size_t>& ns,
                            std::size_t trials, std::uint64_t seed, std::size_t leaf_size) {
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (ns.empty() || std::count(ns.begin(), ns.end(), 0u) > 0) {
    throw Error(ErrorCode::kInvalidArgument, "N values must be >= 1");
  }
  const Attribute& content = corpus.attribute("content");
  const Attribute& style = corpus.attribute("style");
  if (style.cardinality() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two styles");
  const std::size_t max_n = *std::max_element(ns.begin(), ns.end());

  const Tree tree = build_ball_tree(corpus, leaf_size);
  const std::vector<std::string> attrs = {"style"};
  const CondIndex index = build_cond_index(tree, corpus, attrs);
  NodeSetCache cache;

  AccuracyTable table;
  table.ns = ns;
  table.trials = trials;
  table.n_content = content.cardinality();
  table.n_style = style.cardinality();
  table.baseline = 1.0 / double(table.n_content);
  table.successes.assign(ns.size(), 0);
  std::vector<std::size_t> all_successes(ns.size(), 0);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_point(0, corpus.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_style(0, style.cardinality() - 2);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t p = pick_point(rng);
    std::size_t s = pick_style(rng);
    if (s >= style.code(p)) ++s;
    const auto cond = Condition::term("style", std::string(style.values()[s]));
    const auto res = cknn_query(tree, index, corpus, corpus.row(p), cond, max_n, &cache);
    std::vector<std::uint32_t> unconditional;
    for (const auto& nb : knn_query(tree, corpus, corpus.row(p), max_n + 1)) {
      if (nb.id != p && unconditional.size() < max_n) unconditional.push_back(nb.id);
    }
    for (std::size_t j = 0; j < ns.size(); ++j) {
      auto hit = [&](std::uint32_t id) { return content.code(id) == content.code(p) && id != p; };
      const auto& nbs = res.neighbors;
      const std::size_t top = std::min(ns[j], nbs.size());
      if (std::any_of(nbs.begin(), nbs.begin() + top, [&](const Neighbor& nb) { return hit(nb.id); })) {
        ++table.successes[j];
      }
      const std::size_t top_all = std::min(ns[j], unconditional.size());
      if (std::any_of(unconditional.begin(), unconditional.begin() + top_all, hit)) {
        ++all_successes[j];
      }
    }
  }
  for (std::size_t j = 0; j < ns.size(); ++j) {
    table.accuracy.push_back(double(table.successes[j]) / double(trials));
    table.all_accuracy.push_back(double(all_successes[j]) / double(trials));
  }
  return table;
}

Corpus with_random_features(const Corpus& corpus, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> data(corpus.size() * corpus.dim());
  for (auto& v : data) v = normal(rng);
  return Corpus(std::move(data), corpus.size(), corpus.dim(), corpus.metric(), corpus.attributes());
}

std::string to_json(const BenchReport& report) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "speed";
  j["environment"] = {{"n", report.n},
                      {"d", report.d},
                      {"leaf_size", report.leaf_size},
                      {"metric", std::string(to_string(report.metric))},
                      {"repetitions", report.repetitions},
                      {"warmup", report.warmup},
                      {"queries", report.queries},
                      {"k", report.k},
                      {"seed", report.seed}};
  j["reconfig_threshold"] = report.reconfig_threshold;
  j["calibrated"] = report.calibrated;
  j["unconditional_median_ms"] = report.unconditional_median_ms;
  j["all_exact"] = report.all_exact();
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"strategy", std::string(to_string(r.strategy))},
                    {"condition", r.condition},
                    {"expression", r.expression},
                    {"members", r.members},
                    {"fraction", r.fraction},
                    {"bucket", r.bucket},
                    {"median_ms", r.median_ms},
                    {"p90_ms", r.p90_ms},
                    {"speedup", r.speedup},
                    {"mean_nodes_visited", r.mean_nodes_visited},
                    {"mean_points_scored", r.mean_points_scored},
                    {"exact_checked", r.exact_checked},
                    {"exact", r.exact},
                    {"brute_branch", r.brute_branch}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2);
}

std::string to_json(const MemoryTable& t) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "memory";
  j["n"] = t.n;
  j["d"] = t.d;
  j["leaf_size"] = t.leaf_size;
  j["node_count"] = t.node_count;
  j["node_bound"] = t.node_bound;
  j["node_bound_ok"] = t.node_bound_ok;
  j["indexed_values"] = t.indexed_values;
  j["measured"] = {{"data_bytes", t.data_bytes},
                   {"tree_bytes", t.tree_bytes},
                   {"index_bytes", t.index_bytes}};
  j["model_32bit"] = {{"data_bytes", t.n * t.d * 4},
                      {"centroid_bytes", t.centroid_bytes},
                      {"index_bit_bytes", t.index_bit_bytes}};
  j["model_64bit"] = {{"data_bytes", t.data_bytes_64},
                      {"centroid_bytes", t.centroid_bytes_64},
                      {"index_entry_bytes", t.index_entry_bytes_64}};
  return j.dump(2);
}

std::string to_json(const AccuracyTable& t) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "accuracy";
  j["trials"] = t.trials;
  j["n_content"] = t.n_content;
  j["n_style"] = t.n_style;
  j["baseline"] = t.baseline;
  json rows = json::array();
  for (std::size_t i = 0; i < t.ns.size(); ++i) {
    rows.push_back({{"n", t.ns[i]},
                    {"accuracy", t.accuracy[i]},
                    {"successes", t.successes[i]},
                    {"all_accuracy", t.all_accuracy[i]}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2);
}

}  // namespace condra
