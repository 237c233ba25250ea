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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "condra/corpus.hpp"

namespace condra {

enum class TreeKind : std::uint8_t { kBall = 0, kKd = 1, kRpMax = 2 };

std::string_view to_string(TreeKind kind);
TreeKind parse_tree_kind(std::string_view text);

struct TreeNode {
  // Points below the node are Tree::point_order()[begin, end).
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t parent = -1;
  std::uint32_t depth = 0;
  // Bounding ball around Tree::center(node); contains every point below.
  double radius = 0.0;
  // Ball/KD: coordinate index and threshold. RP-Max: threshold on the
  // projection onto Tree::direction(node); split_dim is unused.
  std::uint32_t split_dim = 0;
  double split_value = 0.0;

  bool is_leaf() const noexcept { return left < 0; }
  std::size_t count() const noexcept { return end - begin; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary space-partitioning tree over (a subset of) a corpus. Immutable
/// once built; queries take the corpus it was built over.
class Tree {
 public:
  TreeKind kind() const noexcept { return kind_; }
  std::size_t leaf_size() const noexcept { return leaf_size_; }
  /// Number of indexed points (a subset size for dedicated trees).
  std::size_t size() const noexcept { return point_order_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  Metric metric() const noexcept { return metric_; }
  std::size_t corpus_size() const noexcept { return corpus_size_; }
  std::uint64_t corpus_fingerprint() const noexcept { return corpus_fingerprint_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Identity token of the partition (node ranges and point order).
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  const TreeNode& node(std::size_t i) const { return nodes_[i]; }
  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  std::span<const float> center(std::size_t i) const noexcept {
    return {centers_.data() + i * dim_, dim_};
  }
  /// Split direction of an RP-Max node (empty for other kinds).
  std::span<const float> direction(std::size_t i) const noexcept {
    if (directions_.empty()) return {};
    return {directions_.data() + i * dim_, dim_};
  }
  std::span<const std::uint32_t> point_order() const noexcept { return point_order_; }
  std::span<const std::uint32_t> points(std::size_t node) const noexcept {
    return std::span<const std::uint32_t>(point_order_).subspan(
        nodes_[node].begin, nodes_[node].count());
  }

  /// Throws ErrorCode::kMismatch if `corpus` is not the one this tree was
  /// built over.
  void check_corpus(const Corpus& corpus) const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  friend class TreeBuilder;
  friend Tree read_tree(std::istream& in);
  void seal();

  TreeKind kind_ = TreeKind::kBall;
  std::size_t leaf_size_ = 1;
  std::size_t dim_ = 0;
  Metric metric_ = Metric::kEuclidean;
  std::size_t corpus_size_ = 0;
  std::uint64_t corpus_fingerprint_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t fingerprint_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<float> centers_;
  std::vector<float> directions_;
  std::vector<std::uint32_t> point_order_;
};

/// Median split along the dimension of largest spread. Split ranks follow
/// the leaf budget ceil(count / leaf_size) so the tree has exactly
/// 2 * ceil(n / leaf_size) - 1 nodes.
Tree build_ball_tree(const Corpus& corpus, std::size_t leaf_size);
/// Builds over the listed point ids only (ids keep their corpus meaning).
Tree build_ball_tree(const Corpus& corpus, std::size_t leaf_size,
                     std::span<const std::uint32_t> ids);
/// As build_ball_tree, but the split coordinate cycles with depth.
Tree build_kd_tree(const Corpus& corpus, std::size_t leaf_size);
/// RPTree-Max: random unit direction, split at the projected median plus a
/// jitter drawn uniformly from [-1, 1] * 6 * diam / sqrt(d), where diam is
/// twice the largest distance to the node center.
Tree build_rp_tree(const Corpus& corpus, std::size_t leaf_size, std::uint64_t seed);

struct Neighbor {
  std::uint32_t id = 0;
  double distance = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct SearchStats {
  std::size_t nodes_visited = 0;
  std::size_t points_scored = 0;
};

/// Exact k nearest neighbors, ascending distance, ties by smaller id.
/// Returns min(k, tree.size()) results.
std::vector<Neighbor> knn_query(const Tree& tree, const Corpus& corpus,
                                std::span<const float> query, std::size_t k,
                                SearchStats* stats = nullptr);

struct TreeStats {
  std::size_t node_count = 0;
  std::size_t leaf_count = 0;
  std::size_t depth = 0;
  // Largest radius(child) / radius(parent) over all edges.
  double max_reduction = 0.0;
  // Mean of the same ratio over all edges with a nonzero parent radius.
  double mean_reduction = 0.0;
  std::size_t leaf_point_total = 0;
  // Ten equal-width bins over [0, root radius].
  std::vector<std::size_t> radius_histogram;
};

TreeStats tree_stats(const Tree& tree);

void write_tree(const Tree& tree, std::ostream& out);
Tree read_tree(std::istream& in);
void save_tree(const Tree& tree, const std::filesystem::path& path);
Tree load_tree(const std::filesystem::path& path);

}  // namespace condra
