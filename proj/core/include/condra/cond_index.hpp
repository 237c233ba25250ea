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

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "condra/bitset.hpp"
#include "condra/condition.hpp"
#include "condra/corpus.hpp"
#include "condra/tree.hpp"

namespace condra {

/// Inverted index from each categorical value to its dominating tree nodes:
/// the nodes with at least one point carrying the value somewhere below.
/// Every per-value node set is closed under "parent of".
class CondIndex {
 public:
  struct AttributeEntry {
    std::string name;
    std::vector<std::string> values;     // same order as Attribute::values()
    std::vector<std::size_t> counts;     // |S_value|
    std::vector<NodeSet> node_sets;      // I_class(value)
    friend bool operator==(const AttributeEntry&, const AttributeEntry&) = default;
  };

  std::size_t node_count() const noexcept { return node_count_; }
  std::uint64_t corpus_fingerprint() const noexcept { return corpus_fingerprint_; }
  std::uint64_t tree_fingerprint() const noexcept { return tree_fingerprint_; }
  const std::vector<AttributeEntry>& attributes() const noexcept { return attributes_; }
  const AttributeEntry* find(std::string_view attribute) const noexcept;
  /// I_class(value), or nullptr when the attribute is not indexed or the
  /// value does not occur.
  const NodeSet* class_nodes(std::string_view attribute, std::string_view value) const;
  std::size_t value_count() const noexcept;

  /// Throws ErrorCode::kMismatch unless built for this tree and corpus.
  void check_bound(const Tree& tree, const Corpus& corpus) const;

  friend bool operator==(const CondIndex&, const CondIndex&) = default;

 private:
  friend CondIndex build_cond_index(const Tree&, const Corpus&, std::span<const std::string>);
  friend CondIndex read_cond_index(std::istream& in);

  std::size_t node_count_ = 0;
  std::uint64_t corpus_fingerprint_ = 0;
  std::uint64_t tree_fingerprint_ = 0;
  std::vector<AttributeEntry> attributes_;
};

/// Identity token of a tree's partition (point order and node ranges).
std::uint64_t tree_fingerprint(const Tree& tree);

/// Indexes the named attributes. The tree must be built over all of
/// `corpus` (not a subset).
CondIndex build_cond_index(const Tree& tree, const Corpus& corpus,
                           std::span<const std::string> attributes);
/// Indexes every facet attribute of the corpus.
CondIndex build_cond_index(const Tree& tree, const Corpus& corpus);

/// Node set and member set of one condition.
struct ResolvedCondition {
  std::string canonical;
  NodeSet nodes;   // superset of the nodes holding a member point
  IdSet members;   // exactly the points satisfying the condition
};

/// Memo table keyed by canonical condition text. Safe for concurrent use;
/// two threads resolving the same key may both compute it, and whichever
/// insert lands first is kept. A cache must only be used with one index.
class NodeSetCache {
 public:
  std::shared_ptr<const ResolvedCondition> find(const std::string& key) const;
  /// Returns the cached entry for the key, inserting `value` if absent.
  std::shared_ptr<const ResolvedCondition> insert(std::shared_ptr<const ResolvedCondition> value);
  std::size_t size() const;
  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }
  void clear();

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const ResolvedCondition>> entries_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

/// Resolves a condition structurally through the index: a term maps to
/// I_class(value), OR to union, AND to intersection, NOT to the union over the
/// attribute's other values, ALL to every node. Attributes present in the
/// corpus but not indexed resolve to every node. Throws kBind for attributes
/// the corpus lacks.
std::shared_ptr<const ResolvedCondition> resolve_node_set(const CondIndex& index,
                                                          const Corpus& corpus,
                                                          const Condition& condition,
                                                          NodeSetCache* cache = nullptr);

/// Reference semantics: union of dominating nodes over the member points.
NodeSet dominating_nodes(const Tree& tree, const IdSet& members);

/// Index section appended after a tree: "CIDX" u32 version u32 node_count
/// u64 corpus_fingerprint u64 tree_fingerprint u32 attribute_count, then per
/// attribute its name, value count and per value {name, u32 count,
/// u32 bit length, ceil(bits/8) packed bytes}. Strings are u32-length
/// prefixed.
void write_cond_index(const CondIndex& index, std::ostream& out);
CondIndex read_cond_index(std::istream& in);

/// Tree file with the index section appended.
void save_index_file(const Tree& tree, const CondIndex& index, const std::filesystem::path& path);
struct IndexFile {
  Tree tree;
  std::optional<CondIndex> index;
};
IndexFile load_index_file(const std::filesystem::path& path);

}  // namespace condra
