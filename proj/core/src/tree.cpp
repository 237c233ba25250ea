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

#include "condra/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "condra/error.hpp"
#include "search.hpp"

namespace condra {

std::string_view to_string(TreeKind kind) {
  switch (kind) {
    case TreeKind::kBall: return "ball";
    case TreeKind::kKd: return "kd";
    case TreeKind::kRpMax: return "rp";
  }
  return "ball";
}

TreeKind parse_tree_kind(std::string_view text) {
  if (text == "ball") return TreeKind::kBall;
  if (text == "kd") return TreeKind::kKd;
  if (text == "rp" || text == "rp_max") return TreeKind::kRpMax;
  throw Error(ErrorCode::kInvalidArgument, "unknown tree kind '" + std::string(text) + "'");
}

void Tree::seal() {
  auto mix = [](std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
    return h;
  };
  std::uint64_t h = 1469598103934665603ull;
  h = mix(h, corpus_fingerprint_);
  for (const auto& n : nodes_) h = mix(h, (std::uint64_t{n.begin} << 32) | n.end);
  for (auto id : point_order_) h = mix(h, id);
  fingerprint_ = h;
}

void Tree::check_corpus(const Corpus& corpus) const {
  if (corpus.fingerprint() != corpus_fingerprint_ || corpus.size() != corpus_size_ ||
      corpus.dim() != dim_) {
    throw Error(ErrorCode::kMismatch, "tree was built over a different corpus");
  }
  if (corpus.metric() != metric_) {
    throw Error(ErrorCode::kMismatch, "tree metric differs from corpus metric");
  }
}

class TreeBuilder {
 public:
  TreeBuilder(const Corpus& corpus, TreeKind kind, std::size_t leaf_size, std::uint64_t seed,
              std::vector<std::uint32_t> ids)
      : corpus_(corpus), rng_(seed) {
    if (leaf_size == 0) throw Error(ErrorCode::kInvalidArgument, "leaf_size must be >= 1");
    if (ids.empty()) throw Error(ErrorCode::kEmpty, "cannot build a tree over zero points");
    for (auto id : ids) {
      if (id >= corpus.size()) throw Error(ErrorCode::kInvalidArgument, "point id out of range");
    }
    tree_.kind_ = kind;
    tree_.leaf_size_ = leaf_size;
    tree_.dim_ = corpus.dim();
    tree_.metric_ = corpus.metric();
    tree_.corpus_size_ = corpus.size();
    tree_.corpus_fingerprint_ = corpus.fingerprint();
    tree_.seed_ = kind == TreeKind::kRpMax ? seed : 0;
    tree_.point_order_ = std::move(ids);
  }

  Tree build() && {
    const std::size_t n = tree_.point_order_.size();
    const std::size_t leaves = (n + tree_.leaf_size_ - 1) / tree_.leaf_size_;
    tree_.nodes_.reserve(2 * leaves);
    build_node(0, static_cast<std::uint32_t>(n), -1, 0);
    tree_.seal();
    return std::move(tree_);
  }

 private:
  std::int32_t build_node(std::uint32_t begin, std::uint32_t end, std::int32_t parent,
                          std::uint32_t depth) {
    const std::size_t d = tree_.dim_;
    const auto idx = static_cast<std::int32_t>(tree_.nodes_.size());
    TreeNode node;
    node.begin = begin;
    node.end = end;
    node.parent = parent;
    node.depth = depth;
    tree_.nodes_.push_back(node);
    tree_.centers_.resize(tree_.nodes_.size() * d);
    if (tree_.kind_ == TreeKind::kRpMax) tree_.directions_.resize(tree_.nodes_.size() * d);
    bound(idx);

    const std::size_t m = end - begin;
    if (m <= tree_.leaf_size_) return idx;

    std::uint32_t mid = 0;
    if (tree_.kind_ == TreeKind::kRpMax) {
      mid = split_rp(idx);
    } else {
      mid = split_axis(idx);
    }
    const auto left = build_node(begin, mid, idx, depth + 1);
    const auto right = build_node(mid, end, idx, depth + 1);
    tree_.nodes_[idx].left = left;
    tree_.nodes_[idx].right = right;
    return idx;
  }

  // Centroid ball of the node's points, capped by the parent ball so radii
  // never grow going down.
  void bound(std::int32_t idx) {
    const std::size_t d = tree_.dim_;
    TreeNode& node = tree_.nodes_[idx];
    std::vector<double> mean(d, 0.0);
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      auto r = corpus_.row(tree_.point_order_[i]);
      for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    }
    float* center = tree_.centers_.data() + idx * d;
    for (std::size_t j = 0; j < d; ++j) center[j] = static_cast<float>(mean[j] / node.count());
    std::span<const float> c(center, d);
    double radius_sq = 0.0;
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      radius_sq = std::max(radius_sq, squared_l2(c, corpus_.row(tree_.point_order_[i])));
    }
    node.radius = std::sqrt(radius_sq);
    if (node.parent >= 0) {
      const TreeNode& p = tree_.nodes_[node.parent];
      if (node.radius > p.radius) {
        std::copy_n(tree_.centers_.data() + node.parent * d, d, center);
        node.radius = p.radius;
      }
    }
  }

  std::uint32_t split_axis(std::int32_t idx) {
    TreeNode& node = tree_.nodes_[idx];
    const std::size_t d = tree_.dim_;
    std::size_t dim = 0;
    if (tree_.kind_ == TreeKind::kKd) {
      dim = node.depth % d;
    } else {
      double best_spread = -1.0;
      for (std::size_t j = 0; j < d; ++j) {
        float lo = std::numeric_limits<float>::max(), hi = std::numeric_limits<float>::lowest();
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
          const float v = corpus_.row(tree_.point_order_[i])[j];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (double(hi) - lo > best_spread) {
          best_spread = double(hi) - lo;
          dim = j;
        }
      }
    }
    const std::size_t m = node.count();
    const std::size_t leaves = (m + tree_.leaf_size_ - 1) / tree_.leaf_size_;
    const std::size_t left_leaves = leaves / 2;
    const std::size_t rank = (m * left_leaves + leaves - 1) / leaves;

    auto first = tree_.point_order_.begin() + node.begin;
    auto key = [&](std::uint32_t id) { return std::make_pair(corpus_.row(id)[dim], id); };
    std::nth_element(first, first + rank, first + m,
                     [&](std::uint32_t a, std::uint32_t b) { return key(a) < key(b); });
    node.split_dim = static_cast<std::uint32_t>(dim);
    node.split_value = corpus_.row(*(first + rank))[dim];
    return node.begin + static_cast<std::uint32_t>(rank);
  }

  std::uint32_t split_rp(std::int32_t idx) {
    TreeNode& node = tree_.nodes_[idx];
    const std::size_t d = tree_.dim_;
    const std::size_t m = node.count();
    float* dir = tree_.directions_.data() + idx * d;
    double norm_sq = 0.0;
    std::vector<double> v(d);
    while (norm_sq == 0.0) {
      for (auto& x : v) x = normal_(rng_);
      norm_sq = 0.0;
      for (auto x : v) norm_sq += x * x;
    }
    const double norm = std::sqrt(norm_sq);
    for (std::size_t j = 0; j < d; ++j) dir[j] = static_cast<float>(v[j] / norm);

    std::vector<std::pair<double, std::uint32_t>> proj(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto id = tree_.point_order_[node.begin + i];
      auto r = corpus_.row(id);
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += double(dir[j]) * r[j];
      proj[i] = {s, id};
    }
    auto sorted = proj;
    std::nth_element(sorted.begin(), sorted.begin() + m / 2, sorted.end());
    const double median = sorted[m / 2].first;
    const double diameter = 2.0 * node.radius;
    const double scale = 6.0 * diameter / std::sqrt(static_cast<double>(d));

    // The jitter often lands outside the projected range in low dimension;
    // redraw until both sides are nonempty, else fall back to the median rank.
    std::size_t left_count = 0;
    double threshold = median;
    bool found = false;
    for (int attempt = 0; attempt < 32 && !found; ++attempt) {
      threshold = median + scale * jitter_(rng_);
      left_count = static_cast<std::size_t>(std::count_if(
          proj.begin(), proj.end(), [&](const auto& p) { return p.first <= threshold; }));
      found = left_count > 0 && left_count < m;
    }
    auto out = tree_.point_order_.begin() + node.begin;
    if (found) {
      std::stable_partition(proj.begin(), proj.end(),
                            [&](const auto& p) { return p.first <= threshold; });
    } else {
      left_count = m / 2;
      std::nth_element(proj.begin(), proj.begin() + left_count, proj.end());
      threshold = proj[left_count].first;
    }
    for (std::size_t i = 0; i < m; ++i) out[i] = proj[i].second;
    node.split_value = threshold;
    return node.begin + static_cast<std::uint32_t>(left_count);
  }

  const Corpus& corpus_;
  Tree tree_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> jitter_{-1.0, 1.0};
};

namespace {

std::vector<std::uint32_t> all_ids(const Corpus& corpus) {
  std::vector<std::uint32_t> ids(corpus.size());
  std::iota(ids.begin(), ids.end(), 0u);
  return ids;
}

}  // namespace

Tree build_ball_tree(const Corpus& corpus, std::size_t leaf_size) {
  return TreeBuilder(corpus, TreeKind::kBall, leaf_size, 0, all_ids(corpus)).build();
}

Tree build_ball_tree(const Corpus& corpus, std::size_t leaf_size,
                     std::span<const std::uint32_t> ids) {
  return TreeBuilder(corpus, TreeKind::kBall, leaf_size, 0, {ids.begin(), ids.end()}).build();
}

Tree build_kd_tree(const Corpus& corpus, std::size_t leaf_size) {
  return TreeBuilder(corpus, TreeKind::kKd, leaf_size, 0, all_ids(corpus)).build();
}

Tree build_rp_tree(const Corpus& corpus, std::size_t leaf_size, std::uint64_t seed) {
  return TreeBuilder(corpus, TreeKind::kRpMax, leaf_size, seed, all_ids(corpus)).build();
}

std::vector<Neighbor> knn_query(const Tree& tree, const Corpus& corpus,
                                std::span<const float> query, std::size_t k,
                                SearchStats* stats) {
  tree.check_corpus(corpus);
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto q = prepare_query(corpus, query);
  detail::KBest best(std::min(k, tree.size()));
  SearchStats local;
  detail::tree_search(
      tree, corpus, q, best, [](std::size_t) { return true; },
      [](std::uint32_t) { return true; }, local);
  if (stats) *stats = local;
  return best.sorted();
}

TreeStats tree_stats(const Tree& tree) {
  TreeStats s;
  s.node_count = tree.node_count();
  s.radius_histogram.assign(10, 0);
  const double root_radius = tree.node_count() ? tree.node(0).radius : 0.0;
  double ratio_sum = 0.0;
  std::size_t ratio_edges = 0;
  for (std::size_t i = 0; i < tree.node_count(); ++i) {
    const TreeNode& n = tree.node(i);
    s.depth = std::max<std::size_t>(s.depth, n.depth);
    if (n.is_leaf()) {
      ++s.leaf_count;
      s.leaf_point_total += n.count();
    }
    std::size_t bin = root_radius > 0 ? static_cast<std::size_t>(10.0 * n.radius / root_radius) : 0;
    ++s.radius_histogram[std::min<std::size_t>(bin, 9)];
    if (n.parent >= 0) {
      const double pr = tree.node(static_cast<std::size_t>(n.parent)).radius;
      if (pr > 0) {
        const double ratio = n.radius / pr;
        s.max_reduction = std::max(s.max_reduction, ratio);
        ratio_sum += ratio;
        ++ratio_edges;
      }
    }
  }
  s.mean_reduction = ratio_edges ? ratio_sum / ratio_edges : 0.0;
  return s;
}

}  // namespace condra
