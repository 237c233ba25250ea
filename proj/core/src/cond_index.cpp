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

#include "condra/cond_index.hpp"

#include <fstream>
#include <mutex>

#include "binary_io.hpp"
#include "condra/error.hpp"

namespace condra {

namespace {

constexpr std::uint32_t kIndexVersion = 1;

}  // namespace

std::uint64_t tree_fingerprint(const Tree& tree) { return tree.fingerprint(); }

const CondIndex::AttributeEntry* CondIndex::find(std::string_view attribute) const noexcept {
  for (const auto& a : attributes_) {
    if (a.name == attribute) return &a;
  }
  return nullptr;
}

const NodeSet* CondIndex::class_nodes(std::string_view attribute, std::string_view value) const {
  const auto* a = find(attribute);
  if (!a) return nullptr;
  auto it = std::lower_bound(a->values.begin(), a->values.end(), value);
  if (it == a->values.end() || *it != value) return nullptr;
  return &a->node_sets[static_cast<std::size_t>(it - a->values.begin())];
}

std::size_t CondIndex::value_count() const noexcept {
  std::size_t c = 0;
  for (const auto& a : attributes_) c += a.values.size();
  return c;
}

void CondIndex::check_bound(const Tree& tree, const Corpus& corpus) const {
  if (corpus.fingerprint() != corpus_fingerprint_) {
    throw Error(ErrorCode::kMismatch, "index was built over a different corpus");
  }
  if (tree.node_count() != node_count_ || condra::tree_fingerprint(tree) != tree_fingerprint_) {
    throw Error(ErrorCode::kMismatch, "index was built over a different tree");
  }
}

CondIndex build_cond_index(const Tree& tree, const Corpus& corpus,
                           std::span<const std::string> attributes) {
  tree.check_corpus(corpus);
  if (tree.size() != corpus.size()) {
    throw Error(ErrorCode::kMismatch, "conditional index needs a tree over the whole corpus");
  }
  CondIndex index;
  index.node_count_ = tree.node_count();
  index.corpus_fingerprint_ = corpus.fingerprint();
  index.tree_fingerprint_ = tree_fingerprint(tree);
  for (const auto& name : attributes) {
    const Attribute& attr = corpus.attribute(name);
    CondIndex::AttributeEntry entry;
    entry.name = attr.name();
    entry.values.assign(attr.values().begin(), attr.values().end());
    entry.counts = attr.counts();
    entry.node_sets.assign(attr.cardinality(), NodeSet(tree.node_count()));
    const auto codes = attr.codes();
    for (std::size_t leaf = 0; leaf < tree.node_count(); ++leaf) {
      if (!tree.node(leaf).is_leaf()) continue;
      for (auto p : tree.points(leaf)) {
        NodeSet& set = entry.node_sets[codes[p]];
        // walk to the root, stopping at the first node already marked:
        // its ancestors are marked too
        for (auto node = static_cast<std::int32_t>(leaf); node >= 0 && !set.test(node);
             node = tree.node(static_cast<std::size_t>(node)).parent) {
          set.set(static_cast<std::size_t>(node));
        }
      }
    }
    index.attributes_.push_back(std::move(entry));
  }
  return index;
}

CondIndex build_cond_index(const Tree& tree, const Corpus& corpus) {
  const auto names = corpus.facet_names();
  return build_cond_index(tree, corpus, names);
}

std::shared_ptr<const ResolvedCondition> NodeSetCache::find(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  return it->second;
}

std::shared_ptr<const ResolvedCondition> NodeSetCache::insert(
    std::shared_ptr<const ResolvedCondition> value) {
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.emplace(value->canonical, value);
  return it->second;
}

std::size_t NodeSetCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void NodeSetCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

namespace {

NodeSet resolve_nodes(const CondIndex& index, const Corpus& corpus, const Condition& c) {
  const std::size_t nodes = index.node_count();
  switch (c.kind()) {
    case Condition::Kind::kAll:
      return NodeSet(nodes, true);
    case Condition::Kind::kTerm: {
      corpus.attribute(c.attribute());
      if (!index.find(c.attribute())) return NodeSet(nodes, true);
      const NodeSet* set = index.class_nodes(c.attribute(), c.value());
      return set ? *set : NodeSet(nodes);
    }
    case Condition::Kind::kNot: {
      const Condition& op = c.operands().front();
      std::vector<const Condition*> terms;
      if (op.kind() == Condition::Kind::kTerm) {
        terms.push_back(&op);
      } else {
        for (const auto& t : op.operands()) terms.push_back(&t);
      }
      const std::string& name = terms.front()->attribute();
      corpus.attribute(name);
      const auto* entry = index.find(name);
      if (!entry) return NodeSet(nodes, true);
      NodeSet out(nodes);
      for (std::size_t v = 0; v < entry->values.size(); ++v) {
        bool excluded = false;
        for (const auto* t : terms) excluded = excluded || t->value() == entry->values[v];
        if (!excluded) out |= entry->node_sets[v];
      }
      return out;
    }
    case Condition::Kind::kAnd: {
      NodeSet out = resolve_nodes(index, corpus, c.operands().front());
      for (std::size_t i = 1; i < c.operands().size(); ++i) {
        out &= resolve_nodes(index, corpus, c.operands()[i]);
      }
      return out;
    }
    case Condition::Kind::kOr: {
      NodeSet out(nodes);
      for (const auto& op : c.operands()) out |= resolve_nodes(index, corpus, op);
      return out;
    }
  }
  return NodeSet(nodes, true);
}

}  // namespace

std::shared_ptr<const ResolvedCondition> resolve_node_set(const CondIndex& index,
                                                          const Corpus& corpus,
                                                          const Condition& condition,
                                                          NodeSetCache* cache) {
  if (corpus.fingerprint() != index.corpus_fingerprint()) {
    throw Error(ErrorCode::kMismatch, "index was built over a different corpus");
  }
  std::string key = condition.canonical();
  if (cache) {
    if (auto hit = cache->find(key)) return hit;
  }
  bind_condition(condition, corpus);
  auto resolved = std::make_shared<ResolvedCondition>();
  resolved->canonical = std::move(key);
  resolved->nodes = resolve_nodes(index, corpus, condition);
  resolved->members = condition_members(condition, corpus);
  if (cache) return cache->insert(std::move(resolved));
  return resolved;
}

NodeSet dominating_nodes(const Tree& tree, const IdSet& members) {
  NodeSet out(tree.node_count());
  for (std::size_t leaf = 0; leaf < tree.node_count(); ++leaf) {
    if (!tree.node(leaf).is_leaf()) continue;
    for (auto p : tree.points(leaf)) {
      if (!members.test(p)) continue;
      for (auto node = static_cast<std::int32_t>(leaf); node >= 0 && !out.test(node);
           node = tree.node(static_cast<std::size_t>(node)).parent) {
        out.set(static_cast<std::size_t>(node));
      }
      break;
    }
  }
  return out;
}

void write_cond_index(const CondIndex& index, std::ostream& out) {
  out.write("CIDX", 4);
  detail::put<std::uint32_t>(out, kIndexVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(index.node_count()));
  detail::put<std::uint64_t>(out, index.corpus_fingerprint());
  detail::put<std::uint64_t>(out, index.tree_fingerprint());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(index.attributes().size()));
  for (const auto& a : index.attributes()) {
    detail::put_string(out, a.name);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.values.size()));
    for (std::size_t v = 0; v < a.values.size(); ++v) {
      detail::put_string(out, a.values[v]);
      detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.counts[v]));
      detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.node_sets[v].size()));
      detail::put_array(out, a.node_sets[v].to_bytes());
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "index write failed");
}

CondIndex read_cond_index(std::istream& in) {
  detail::expect_magic(in, "CIDX", "conditional index section");
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kIndexVersion) {
    throw Error(ErrorCode::kFormat, "unsupported index version " + std::to_string(version));
  }
  CondIndex index;
  index.node_count_ = detail::get<std::uint32_t>(in);
  index.corpus_fingerprint_ = detail::get<std::uint64_t>(in);
  index.tree_fingerprint_ = detail::get<std::uint64_t>(in);
  const auto attrs = detail::get<std::uint32_t>(in);
  for (std::uint32_t a = 0; a < attrs; ++a) {
    CondIndex::AttributeEntry entry;
    entry.name = detail::get_string(in);
    const auto values = detail::get<std::uint32_t>(in);
    for (std::uint32_t v = 0; v < values; ++v) {
      entry.values.push_back(detail::get_string(in));
      entry.counts.push_back(detail::get<std::uint32_t>(in));
      const std::size_t bits = detail::get<std::uint32_t>(in);
      if (bits != index.node_count_) throw Error(ErrorCode::kFormat, "node set length mismatch");
      auto bytes = detail::get_array<std::uint8_t>(in, (bits + 7) / 8);
      entry.node_sets.push_back(NodeSet::from_bytes(bytes, bits));
    }
    index.attributes_.push_back(std::move(entry));
  }
  return index;
}

void save_index_file(const Tree& tree, const CondIndex& index, const std::filesystem::path& path) {
  if (tree.node_count() != index.node_count() || tree_fingerprint(tree) != index.tree_fingerprint()) {
    throw Error(ErrorCode::kMismatch, "index does not belong to this tree");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_tree(tree, out);
  write_cond_index(index, out);
}

IndexFile load_index_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  IndexFile file{read_tree(in), std::nullopt};
  if (in.peek() != std::char_traits<char>::eof()) file.index = read_cond_index(in);
  if (file.index && file.index->tree_fingerprint() != tree_fingerprint(file.tree)) {
    throw Error(ErrorCode::kFormat, "index section does not match the tree in " + path.string());
  }
  return file;
}

}  // namespace condra
