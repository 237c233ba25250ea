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

#include <fstream>

#include "binary_io.hpp"
#include "condra/tree.hpp"

namespace condra {

namespace {

constexpr std::uint32_t kTreeVersion = 1;

}  // namespace

// Layout (little-endian):
//   "CTRE" u32 version u8 kind u32 leaf_size u32 node_count u32 n u32 d
//   u8 metric u32 corpus_size u64 corpus_fingerprint u64 seed
//   node_count x {u32 begin, u32 end, i32 left, i32 right, i32 parent,
//                 u32 depth, f64 radius, u32 split_dim, f64 split_value}
//   node_count*d f32 centers, [node_count*d f32 directions if rp]
//   n u32 point order (node begin/end are offsets into it)
void write_tree(const Tree& tree, std::ostream& out) {
  out.write("CTRE", 4);
  detail::put<std::uint32_t>(out, kTreeVersion);
  detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(tree.kind()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(tree.leaf_size()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(tree.node_count()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(tree.size()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(tree.dim()));
  detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(tree.metric()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(tree.corpus_size()));
  detail::put<std::uint64_t>(out, tree.corpus_fingerprint());
  detail::put<std::uint64_t>(out, tree.seed());
  for (const auto& n : tree.nodes()) {
    detail::put(out, n.begin);
    detail::put(out, n.end);
    detail::put(out, n.left);
    detail::put(out, n.right);
    detail::put(out, n.parent);
    detail::put(out, n.depth);
    detail::put(out, n.radius);
    detail::put(out, n.split_dim);
    detail::put(out, n.split_value);
  }
  for (std::size_t i = 0; i < tree.node_count(); ++i) {
    auto c = tree.center(i);
    out.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size_bytes()));
  }
  if (tree.kind() == TreeKind::kRpMax) {
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
      auto v = tree.direction(i);
      out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
    }
  }
  auto order = tree.point_order();
  out.write(reinterpret_cast<const char*>(order.data()), static_cast<std::streamsize>(order.size_bytes()));
  if (!out) throw Error(ErrorCode::kIo, "tree write failed");
}

Tree read_tree(std::istream& in) {
  detail::expect_magic(in, "CTRE", "tree file");
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kTreeVersion) {
    throw Error(ErrorCode::kFormat, "unsupported tree version " + std::to_string(version));
  }
  Tree t;
  const auto kind = detail::get<std::uint8_t>(in);
  if (kind > 2) throw Error(ErrorCode::kFormat, "unknown tree kind");
  t.kind_ = static_cast<TreeKind>(kind);
  t.leaf_size_ = detail::get<std::uint32_t>(in);
  const std::size_t node_count = detail::get<std::uint32_t>(in);
  const std::size_t n = detail::get<std::uint32_t>(in);
  t.dim_ = detail::get<std::uint32_t>(in);
  const auto metric = detail::get<std::uint8_t>(in);
  if (metric > 1) throw Error(ErrorCode::kFormat, "unknown metric in tree file");
  t.metric_ = static_cast<Metric>(metric);
  t.corpus_size_ = detail::get<std::uint32_t>(in);
  t.corpus_fingerprint_ = detail::get<std::uint64_t>(in);
  t.seed_ = detail::get<std::uint64_t>(in);
  if (node_count == 0 || n == 0 || t.dim_ == 0 || t.leaf_size_ == 0) {
    throw Error(ErrorCode::kFormat, "tree header has zero-sized fields");
  }
  t.nodes_.resize(node_count);
  for (auto& nd : t.nodes_) {
    nd.begin = detail::get<std::uint32_t>(in);
    nd.end = detail::get<std::uint32_t>(in);
    nd.left = detail::get<std::int32_t>(in);
    nd.right = detail::get<std::int32_t>(in);
    nd.parent = detail::get<std::int32_t>(in);
    nd.depth = detail::get<std::uint32_t>(in);
    nd.radius = detail::get<double>(in);
    nd.split_dim = detail::get<std::uint32_t>(in);
    nd.split_value = detail::get<double>(in);
    if (nd.begin > nd.end || nd.end > n || nd.left >= static_cast<std::int32_t>(node_count) ||
        nd.right >= static_cast<std::int32_t>(node_count)) {
      throw Error(ErrorCode::kFormat, "tree node references out of range");
    }
  }
  t.centers_ = detail::get_array<float>(in, node_count * t.dim_);
  if (t.kind_ == TreeKind::kRpMax) t.directions_ = detail::get_array<float>(in, node_count * t.dim_);
  t.point_order_ = detail::get_array<std::uint32_t>(in, n);
  for (auto id : t.point_order_) {
    if (id >= t.corpus_size_) throw Error(ErrorCode::kFormat, "tree point id out of range");
  }
  t.seal();
  return t;
}

void save_tree(const Tree& tree, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_tree(tree, out);
}

Tree load_tree(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_tree(in);
}

}  // namespace condra
