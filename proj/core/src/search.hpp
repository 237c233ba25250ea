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

// Shared best-first traversal used by the unconditional and conditional
// tree searches.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "condra/tree.hpp"

namespace condra::detail {

/// Keeps the k smallest (squared distance, id) pairs. Small k uses a
/// bounded max-heap; large k (query-then-filter fan-outs) buffers up to 2k
/// entries and compacts with a selection, which is linear per offer.
class KBest {
 public:
  explicit KBest(std::size_t k) : k_(k), heap_mode_(k <= kHeapLimit) {
    entries_.reserve(heap_mode_ ? k : 2 * k);
  }

  /// True once worst_sq() bounds the k-th best distance.
  bool full() const noexcept { return heap_mode_ ? entries_.size() >= k_ : has_cutoff_; }
  double worst_sq() const noexcept {
    if (!full()) return std::numeric_limits<double>::infinity();
    return heap_mode_ ? entries_.front().first : cutoff_.first;
  }

  void offer(double sq, std::uint32_t id) {
    if (k_ == 0) return;
    const Entry e{sq, id};
    if (heap_mode_) {
      if (entries_.size() < k_) {
        entries_.push_back(e);
        std::push_heap(entries_.begin(), entries_.end());
      } else if (e < entries_.front()) {
        std::pop_heap(entries_.begin(), entries_.end());
        entries_.back() = e;
        std::push_heap(entries_.begin(), entries_.end());
      }
      return;
    }
    if (has_cutoff_ && !(e < cutoff_)) return;
    entries_.push_back(e);
    if (entries_.size() >= 2 * k_) compact();
  }

  /// The kept entries in unspecified order.
  std::vector<std::pair<double, std::uint32_t>> unordered() {
    if (!heap_mode_ && entries_.size() > k_) compact();
    return entries_;
  }

  std::vector<Neighbor> sorted() {
    auto entries = unordered();
    std::sort(entries.begin(), entries.end());
    std::vector<Neighbor> out;
    out.reserve(entries.size());
    for (const auto& [sq, id] : entries) out.push_back({id, std::sqrt(sq)});
    return out;
  }

 private:
  using Entry = std::pair<double, std::uint32_t>;
  static constexpr std::size_t kHeapLimit = 256;

  void compact() {
    std::nth_element(entries_.begin(), entries_.begin() + (k_ - 1), entries_.end());
    entries_.resize(k_);
    cutoff_ = entries_[k_ - 1];
    has_cutoff_ = true;
  }

  std::size_t k_;
  bool heap_mode_;
  bool has_cutoff_ = false;
  Entry cutoff_{};
  std::vector<Entry> entries_;
};

/// True when no point inside a ball (center distance `dc`, radius `r`) can
/// beat the current k-th best. Ties must still be visited because a point at
/// exactly the k-th distance can win on id, so the test is strict and keeps
/// a small margin for rounding in the bound itself.
inline bool can_prune(double dc, double r, const KBest& best) {
  if (!best.full()) return false;
  const double lb = dc - r - 1e-9 * (dc + r);
  if (lb <= 0) return false;
  return lb * lb > best.worst_sq();
}

inline void prefetch_row(const Corpus& corpus, std::uint32_t id) {
  const auto row = corpus.row(id);
  const char* p = reinterpret_cast<const char*>(row.data());
  const std::size_t bytes = row.size() * sizeof(float);
  for (std::size_t off = 0; off < bytes; off += 64) __builtin_prefetch(p + off);
}

/// Squared distances already computed for the current query, so repeated
/// searches with a growing fan-out score each point once. Entries are
/// invalidated in O(1) by bumping a generation stamp.
class DistanceMemo {
 public:
  void reset(std::size_t n) {
    if (stamp_.size() != n || generation_ == std::numeric_limits<std::uint32_t>::max()) {
      stamp_.assign(n, 0);
      value_.resize(n);
      generation_ = 0;
    }
    ++generation_;
  }
  bool find(std::uint32_t p, double& sq) const {
    if (stamp_[p] != generation_) return false;
    sq = value_[p];
    return true;
  }
  void store(std::uint32_t p, double sq) {
    stamp_[p] = generation_;
    value_[p] = sq;
  }

 private:
  std::vector<std::uint32_t> stamp_;
  std::vector<double> value_;
  std::uint32_t generation_ = 0;
};

template <class NodeOk, class PointOk>
void tree_search(const Tree& tree, const Corpus& corpus, std::span<const float> q,
                 KBest& best, const NodeOk& node_ok, const PointOk& point_ok,
                 SearchStats& stats, DistanceMemo* memo = nullptr) {
  std::vector<std::uint32_t> scratch;
  scratch.reserve(tree.leaf_size());
  auto visit = [&](auto&& self, std::size_t i) -> void {
    if (!node_ok(i)) return;
    ++stats.nodes_visited;
    const TreeNode& node = tree.node(i);
    if (node.is_leaf()) {
      scratch.clear();
      for (auto p : tree.points(i)) {
        if (!point_ok(p)) continue;
        double known = 0.0;
        if (memo && memo->find(p, known)) {
          best.offer(known, p);
        } else {
          scratch.push_back(p);
        }
      }
      const std::size_t m = scratch.size();
      // Rows are visited in tree order, which is random in memory; fetch a
      // few rows ahead so the loads overlap with the distance arithmetic.
      constexpr std::size_t kAhead = 4;
      for (std::size_t j = 0; j < std::min(kAhead, m); ++j) prefetch_row(corpus, scratch[j]);
      for (std::size_t j = 0; j < m; ++j) {
        if (j + kAhead < m) prefetch_row(corpus, scratch[j + kAhead]);
        const double sq = squared_l2(q, corpus.row(scratch[j]));
        if (memo) memo->store(scratch[j], sq);
        best.offer(sq, scratch[j]);
      }
      stats.points_scored += m;
      return;
    }
    const auto l = static_cast<std::size_t>(node.left);
    const auto r = static_cast<std::size_t>(node.right);
    const double dl = std::sqrt(squared_l2(q, tree.center(l)));
    const double dr = std::sqrt(squared_l2(q, tree.center(r)));
    const double rl = tree.node(l).radius;
    const double rr = tree.node(r).radius;
    // nearer lower bound first
    const bool left_first = (dl - rl) <= (dr - rr);
    const std::size_t first = left_first ? l : r;
    const std::size_t second = left_first ? r : l;
    const double d_first = left_first ? dl : dr, r_first = left_first ? rl : rr;
    const double d_second = left_first ? dr : dl, r_second = left_first ? rr : rl;
    if (!can_prune(d_first, r_first, best)) self(self, first);
    if (!can_prune(d_second, r_second, best)) self(self, second);
  };
  if (tree.node_count() > 0) visit(visit, 0);
}

}  // namespace condra::detail
