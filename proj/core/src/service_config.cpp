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

#include <string>

#include "condra/error.hpp"
#include "condra/keyvalue.hpp"
#include "condra/service.hpp"

namespace condra {

ServiceConfig load_service_config(const std::filesystem::path& path) {
  const KeyValueDocument doc = read_key_value_file(path);
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  ServiceConfig config;
  config.addr = doc.root.get_string("addr", config.addr);
  const auto it = doc.arrays.find("collection");
  if (it == doc.arrays.end() || it->second.empty()) {
    throw Error(ErrorCode::kFormat, path.string() + ": no [[collection]] entries");
  }
  for (const auto& table : it->second) {
    CollectionConfig c;
    c.id = table.require_string("id");
    c.path = resolve(table.require_string("path"));
    if (auto idx = table.get("index")) c.index = resolve(*idx);
    const auto leaf = table.get_int("leaf_size", static_cast<std::int64_t>(c.leaf_size));
    if (leaf < 1) throw Error(ErrorCode::kFormat, "collection '" + c.id + "': leaf_size must be >= 1");
    c.leaf_size = static_cast<std::size_t>(leaf);
    config.collections.push_back(std::move(c));
  }
  return config;
}

std::shared_ptr<const CollectionHandle> load_collection(const CollectionConfig& config) {
  try {
    Corpus corpus = load_corpus(config.path);
    if (!config.index) return make_collection(config.id, std::move(corpus), config.leaf_size);
    IndexFile file = load_index_file(*config.index);
    file.tree.check_corpus(corpus);
    CondIndex index = file.index ? std::move(*file.index) : build_cond_index(file.tree, corpus);
    return std::make_shared<const CollectionHandle>(config.id, std::move(corpus),
                                                    std::move(file.tree), std::move(index));
  } catch (const Error& e) {
    throw Error(e.code(), "collection '" + config.id + "': " + e.what(), e.position());
  }
}

}  // namespace condra
