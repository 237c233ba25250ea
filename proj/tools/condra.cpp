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

// condra: command-line front end for corpus generation, index builds,
// conditional queries, RCD analysis, benchmarks and the retrieval service.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "condra/analytics.hpp"
#include "condra/bench.hpp"
#include "condra/cond_index.hpp"
#include "condra/condition.hpp"
#include "condra/error.hpp"
#include "condra/generate.hpp"
#include "condra/service.hpp"
#include "condra/strategies.hpp"
#include "json.hpp"

namespace {

using namespace condra;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw Error(ErrorCode::kInvalidArgument, "bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<float> read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<float> out;
  std::string token;
  while (in >> token) {
    std::stringstream ss(token);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(std::stof(part));
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  out << text << "\n";
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

Tree build_tree(const Corpus& corpus, TreeKind kind, std::size_t leaf, std::uint64_t seed) {
  switch (kind) {
    case TreeKind::kBall: return build_ball_tree(corpus, leaf);
    case TreeKind::kKd: return build_kd_tree(corpus, leaf);
    case TreeKind::kRpMax: return build_rp_tree(corpus, leaf, seed);
  }
  return build_ball_tree(corpus, leaf);
}

HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"condra: exact conditional nearest-neighbor retrieval"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic corpus directory");
  gen->require_subcommand(1);
  std::string gen_out;
  std::uint64_t gen_seed = 1;

  auto* gen_clustered = gen->add_subcommand("clustered", "Gaussian clusters with label and bucket attributes");
  std::size_t cl_n = 100000, cl_d = 64, cl_labels = 200, cl_buckets = 10;
  double cl_spread = 10.0;
  gen_clustered->add_option("--n", cl_n)->check(CLI::PositiveNumber);
  gen_clustered->add_option("--d", cl_d)->check(CLI::PositiveNumber);
  gen_clustered->add_option("--labels", cl_labels)->check(CLI::PositiveNumber);
  gen_clustered->add_option("--buckets", cl_buckets)->check(CLI::PositiveNumber);
  gen_clustered->add_option("--spread", cl_spread);

  auto* gen_cs = gen->add_subcommand("content-style", "one point per (content, style) pair");
  std::size_t cs_contents = 63, cs_styles = 249, cs_d = 32;
  double cs_strength = 0.25, cs_noise = 0.1;
  bool cs_random = false;
  gen_cs->add_option("--contents", cs_contents);
  gen_cs->add_option("--styles", cs_styles);
  gen_cs->add_option("--d", cs_d);
  gen_cs->add_option("--strength", cs_strength);
  gen_cs->add_option("--noise", cs_noise);
  gen_cs->add_flag("--random-features", cs_random, "replace features with N(0, I) noise");

  auto* gen_pair = gen->add_subcommand("pair", "matched-moment real/generated pair in one corpus");
  std::string pair_kind = "ring_vs_blob";
  std::size_t pair_n = 50000;
  gen_pair->add_option("--kind", pair_kind)
      ->check(CLI::IsMember({"mode_drop", "ring_vs_blob", "cluster_split", "identical"}));
  gen_pair->add_option("--n", pair_n);

  for (auto* sub : {gen_clustered, gen_cs, gen_pair}) {
    sub->add_option("--out", gen_out, "output corpus directory")->required();
    sub->add_option("--seed", gen_seed);
  }

  // build
  auto* build = app.add_subcommand("build", "build a tree and conditional index file");
  std::string corpus_dir, index_path, kind_text = "ball";
  std::size_t leaf_size = 64;
  std::uint64_t tree_seed = 1;
  std::vector<std::string> index_attrs;
  build->add_option("--corpus", corpus_dir)->required();
  build->add_option("--out", index_path)->required();
  build->add_option("--kind", kind_text)->check(CLI::IsMember({"ball", "kd", "rp"}));
  build->add_option("--leaf-size", leaf_size)->check(CLI::PositiveNumber);
  build->add_option("--seed", tree_seed);
  build->add_option("--attrs", index_attrs, "attributes to index (default: all facets)")->delimiter(',');

  // query
  auto* query = app.add_subcommand("query", "conditional k-nearest-neighbor query");
  std::string q_text, cond_text = "ALL", strategy_text = "cond";
  std::size_t k = 10;
  bool exclude_self = false;
  query->add_option("--corpus", corpus_dir)->required();
  query->add_option("--index", index_path, "index file from `condra build` (built on the fly if absent)");
  query->add_option("--q", q_text, "query point id or a file of whitespace/comma separated floats")->required();
  query->add_option("--cond", cond_text);
  query->add_option("--k", k)->check(CLI::PositiveNumber);
  query->add_option("--strategy", strategy_text)
      ->check(CLI::IsMember({"cond", "qtf", "reconf", "brute", "dedicated", "batched"}));
  query->add_option("--leaf-size", leaf_size);
  query->add_flag("--exclude-self", exclude_self, "drop the query point when --q is an id");

  // rcd
  auto* rcd_cmd = app.add_subcommand("rcd", "relative conditioner density report");
  std::string label_attr = "source", positive = "generated", summary_path;
  double alpha = 0.01, threshold = 0.6;
  rcd_cmd->add_option("--corpus", corpus_dir)->required();
  rcd_cmd->add_option("--label-attr", label_attr);
  rcd_cmd->add_option("--positive", positive);
  rcd_cmd->add_option("--alpha", alpha);
  rcd_cmd->add_option("--threshold", threshold);
  rcd_cmd->add_option("--kind", kind_text)->check(CLI::IsMember({"ball", "kd", "rp"}));
  rcd_cmd->add_option("--leaf-size", leaf_size);
  rcd_cmd->add_option("--seed", tree_seed);
  rcd_cmd->add_option("--summary", summary_path, "write the JSON summary here instead of stderr");

  // theorem1
  auto* th = app.add_subcommand("theorem1", "cell-coverage curve for nested ball subsets");
  std::string radii_text = "0.5,0.25,0.1,0.05";
  std::size_t th_seeds = 20, th_n = 10000, th_d = 2, th_leaf = 10;
  th->add_option("--radii", radii_text);
  th->add_option("--seeds", th_seeds)->check(CLI::PositiveNumber);
  th->add_option("--corpus", corpus_dir, "corpus directory (default: a standard Gaussian sample)");
  th->add_option("--n", th_n);
  th->add_option("--d", th_d);
  th->add_option("--leaf-size", th_leaf);

  // bench
  auto* bench = app.add_subcommand("bench", "benchmarks");
  bench->require_subcommand(1);
  std::string bench_out;
  std::uint64_t bench_seed = 1;
  auto* speed = bench->add_subcommand("speed", "strategy latency by condition fraction");
  std::size_t sp_n = 100000, sp_d = 64, sp_labels = 200, sp_buckets = 10, sp_queries = 1000,
              sp_k = 10, sp_reps = 5, sp_leaf = 64;
  speed->add_option("--n", sp_n);
  speed->add_option("--d", sp_d);
  speed->add_option("--labels", sp_labels);
  speed->add_option("--buckets", sp_buckets);
  speed->add_option("--queries", sp_queries);
  speed->add_option("--k", sp_k);
  speed->add_option("--repetitions", sp_reps)->check(CLI::Range(5, 1000));
  speed->add_option("--leaf-size", sp_leaf);
  auto* acc = bench->add_subcommand("accuracy", "Accuracy@N on a content/style corpus");
  std::size_t ac_contents = 63, ac_styles = 249, ac_d = 32, ac_trials = 10000;
  double ac_strength = 0.25, ac_noise = 0.1;
  bool ac_random = false;
  acc->add_option("--contents", ac_contents);
  acc->add_option("--styles", ac_styles);
  acc->add_option("--d", ac_d);
  acc->add_option("--strength", ac_strength);
  acc->add_option("--noise", ac_noise);
  acc->add_option("--trials", ac_trials);
  acc->add_flag("--random-features", ac_random);
  auto* mem = bench->add_subcommand("memory", "serialized sizes against the space model");
  std::size_t mem_n = 100000, mem_d = 64, mem_labels = 200, mem_leaf = 500;
  mem->add_option("--n", mem_n);
  mem->add_option("--d", mem_d);
  mem->add_option("--labels", mem_labels);
  mem->add_option("--leaf-size", mem_leaf);
  for (auto* sub : {speed, acc, mem}) {
    sub->add_option("--out", bench_out, "output JSON file (default: stdout)");
    sub->add_option("--seed", bench_seed);
  }

  // serve
  auto* serve = app.add_subcommand("serve", "run the retrieval service");
  std::string config_path, addr;
  serve->add_option("--config", config_path)->required();
  serve->add_option("--addr", addr, "host:port (overrides the config file)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (gen_clustered->parsed()) {
        save_corpus(generate_clustered_labels(cl_n, cl_d, cl_labels, cl_buckets, gen_seed, cl_spread), gen_out);
      } else if (gen_cs->parsed()) {
        Corpus c = generate_content_style(cs_contents, cs_styles, cs_d, cs_strength, cs_noise, gen_seed);
        save_corpus(cs_random ? with_random_features(c, gen_seed + 1) : c, gen_out);
      } else {
        MatchedPair p = matched_moment_pair(parse_pair_kind(pair_kind), pair_n, gen_seed);
        save_corpus(concat(p.real, p.generated), gen_out);
      }
      return 0;
    }

    if (build->parsed()) {
      const Corpus corpus = load_corpus(corpus_dir);
      const Tree tree = build_tree(corpus, parse_tree_kind(kind_text), leaf_size, tree_seed);
      const CondIndex index = index_attrs.empty() ? build_cond_index(tree, corpus)
                                                  : build_cond_index(tree, corpus, index_attrs);
      save_index_file(tree, index, index_path);
      return 0;
    }

    if (query->parsed()) {
      const Corpus corpus = load_corpus(corpus_dir);
      std::optional<Tree> tree;
      std::optional<CondIndex> index;
      if (!index_path.empty()) {
        IndexFile file = load_index_file(index_path);
        file.tree.check_corpus(corpus);
        tree = std::move(file.tree);
        index = file.index ? std::move(*file.index) : build_cond_index(*tree, corpus);
      } else {
        tree = build_ball_tree(corpus, leaf_size);
        index = build_cond_index(*tree, corpus);
      }
      std::optional<std::size_t> self;
      std::vector<float> q;
      if (!q_text.empty() && q_text.find_first_not_of("0123456789") == std::string::npos) {
        self = std::stoull(q_text);
        if (*self >= corpus.size()) throw Error(ErrorCode::kNotFound, "point id out of range");
        const auto row = corpus.row(*self);
        q.assign(row.begin(), row.end());
      } else {
        q = read_vector_file(q_text);
      }
      const Condition cond = parse_condition(cond_text);
      const auto resolved = resolve_node_set(*index, corpus, cond);
      const bool drop = exclude_self && self.has_value();
      const std::size_t want = drop ? k + 1 : k;
      ResultList res;
      switch (parse_strategy(strategy_text)) {
        case Strategy::kConditional: res = cknn_query(*tree, corpus, q, *resolved, want); break;
        case Strategy::kQueryThenFilter: res = query_then_filter(*tree, corpus, q, resolved->members, want); break;
        case Strategy::kReconfigured: res = reconfigured_query(*tree, corpus, q, *resolved, want); break;
        case Strategy::kBruteForce: res = brute_force_cknn(corpus, q, resolved->members, want); break;
        case Strategy::kDedicated:
          if (!resolved->members.none()) {
            res = dedicated_query(build_dedicated(corpus, resolved->members, tree->leaf_size()), corpus, q, want);
          }
          break;
        case Strategy::kBatched:
          res = batched_brute_force(corpus, q, 1, std::span<const IdSet>(&resolved->members, 1), want)[0][0];
          break;
      }
      std::size_t rank = 0;
      std::cout << "rank\tpoint_id\tdistance\n";
      for (const auto& nb : res.neighbors) {
        if (drop && nb.id == *self) continue;
        if (rank == k) break;
        std::cout << ++rank << '\t' << nb.id << '\t' << std::setprecision(9) << nb.distance << '\n';
      }
      return 0;
    }

    if (rcd_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_dir);
      const Tree tree = build_tree(corpus, parse_tree_kind(kind_text), leaf_size, tree_seed);
      const IdSet members = condition_members(Condition::term(label_attr, positive), corpus);
      const RcdReport report = rcd_report(tree, members, alpha);
      const auto spots = blind_spots(tree, report, threshold);
      std::cout << "node_id\tdepth\tcount\tmembers\trcd\tp\tflag\n";
      for (const auto& n : report.nodes) {
        std::cout << n.node << '\t' << n.depth << '\t' << n.count << '\t' << n.members << '\t'
                  << std::setprecision(9) << n.rcd << '\t' << n.p_value << '\t'
                  << (n.significant ? 1 : 0) << '\n';
      }
      nlohmann::ordered_json summary{{"flagged_fraction", report.flagged_fraction()},
                                     {"blind_spot_count", spots.size()}};
      if (summary_path.empty()) {
        std::cerr << summary.dump() << "\n";
      } else {
        write_text(summary_path, summary.dump(2));
      }
      return 0;
    }

    if (th->parsed()) {
      std::optional<Corpus> corpus;
      if (!corpus_dir.empty()) {
        corpus = load_corpus(corpus_dir);
      } else {
        MixtureComponent g{"gaussian", th_n, std::vector<double>(th_d, 0.0), {}};
        corpus = generate_blobs(std::span<const MixtureComponent>(&g, 1), 1);
      }
      const auto radii = parse_list(radii_text);
      std::vector<std::uint64_t> seeds(th_seeds);
      for (std::size_t i = 0; i < th_seeds; ++i) seeds[i] = i + 1;
      const CoverageCurve curve = theorem1_experiment(*corpus, radii, th_leaf, seeds);
      std::cout << "radius_fraction,subset_size,mean_fraction,min_fraction,max_fraction,reference,"
                   "mean_max_reduction,seeds\n";
      for (const auto& p : curve.points) {
        std::cout << p.radius_fraction << ',' << p.subset_size << ',' << std::setprecision(9)
                  << p.mean_fraction << ',' << p.min_fraction << ',' << p.max_fraction << ','
                  << p.reference << ',' << p.mean_max_reduction << ',' << p.seeds << '\n';
      }
      return 0;
    }

    if (bench->parsed()) {
      if (speed->parsed()) {
        const Corpus corpus = generate_clustered_labels(sp_n, sp_d, sp_labels, sp_buckets, bench_seed);
        SpeedOptions opt;
        opt.queries = sp_queries;
        opt.k = sp_k;
        opt.repetitions = sp_reps;
        opt.leaf_size = sp_leaf;
        opt.seed = bench_seed;
        const auto specs = clustered_condition_specs(sp_labels, sp_buckets, default_condition_fractions());
        write_text(bench_out, to_json(run_speed_benchmark(corpus, specs, opt)));
      } else if (acc->parsed()) {
        Corpus corpus = generate_content_style(ac_contents, ac_styles, ac_d, ac_strength, ac_noise, bench_seed);
        if (ac_random) corpus = with_random_features(corpus, bench_seed + 1);
        write_text(bench_out, to_json(accuracy_at_n(corpus, {1, 10}, ac_trials, bench_seed)));
      } else {
        const Corpus corpus = generate_clustered_labels(mem_n, mem_d, mem_labels, 1, bench_seed);
        const Tree tree = build_ball_tree(corpus, mem_leaf);
        const std::vector<std::string> attrs = {"label"};
        const CondIndex index = build_cond_index(tree, corpus, attrs);
        write_text(bench_out, to_json(measure_memory(tree, index, corpus)));
      }
      return 0;
    }

    if (serve->parsed()) {
      const ServiceConfig config = load_service_config(config_path);
      std::vector<std::shared_ptr<const CollectionHandle>> collections;
      for (const auto& c : config.collections) {
        collections.push_back(load_collection(c));
        std::cerr << "loaded collection '" << c.id << "' (" << collections.back()->corpus.size()
                  << " points)\n";
      }
      const Service service(std::move(collections));
      const auto [host, port] = parse_address(addr.empty() ? config.addr : addr);
      HttpServer server(service);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "listening on " << host << ":" << bound << "\n";
      server.listen();
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "condra: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "condra: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
