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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "condra/cond_index.hpp"
#include "condra/corpus.hpp"
#include "condra/tree.hpp"

namespace condra {

inline constexpr std::size_t kMaxServiceK = 100;
inline constexpr std::size_t kDefaultSearchLimit = 20;

struct FacetValue {
  std::string value;
  std::size_t count = 0;
};

struct Facet {
  std::string attribute;
  std::vector<FacetValue> values;  // counts descending, ties by value
};

/// A loaded collection. Immutable after construction apart from the
/// node-set cache, which is internally synchronized.
struct CollectionHandle {
  std::string id;
  Corpus corpus;
  Tree tree;
  CondIndex index;
  mutable NodeSetCache cache;
  std::chrono::system_clock::time_point loaded_at;
  std::vector<Facet> catalog;

  CollectionHandle(std::string id, Corpus corpus, Tree tree, CondIndex index);
};

/// Builds a ball tree and an index over every facet.
std::shared_ptr<const CollectionHandle> make_collection(std::string id, Corpus corpus,
                                                        std::size_t leaf_size);

struct CollectionConfig {
  std::string id;
  std::filesystem::path path;                  // corpus directory
  std::optional<std::filesystem::path> index;  // prebuilt tree + index file
  std::size_t leaf_size = 64;
};

struct ServiceConfig {
  std::string addr = "127.0.0.1:8080";
  std::vector<CollectionConfig> collections;
};

/// Reads `[[collection]]` entries (id, path, optional index, leaf_size) and
/// an optional top-level `addr`. Relative paths resolve against the file's
/// directory.
ServiceConfig load_service_config(const std::filesystem::path& path);

/// Loads one bundle. Failures rethrow with the collection id in the message.
std::shared_ptr<const CollectionHandle> load_collection(const CollectionConfig& config);

struct Response {
  int status = 200;
  std::string body;  // JSON
};

using QueryParams = std::multimap<std::string, std::string>;

/// Transport-independent request router for the retrieval API:
///   GET  /collections
///   GET  /collections/{id}/facets
///   POST /collections/{id}/query
///   GET  /collections/{id}/points/{pid}
///   GET  /collections/{id}/search?q=&limit=
/// Errors are {"error": {"code", "message", "position"?}}.
class Service {
 public:
  explicit Service(std::vector<std::shared_ptr<const CollectionHandle>> collections);

  Response handle(std::string_view method, std::string_view path, const QueryParams& params,
                  std::string_view body) const;

  const CollectionHandle* find(std::string_view id) const;

 private:
  std::vector<std::shared_ptr<const CollectionHandle>> collections_;
};

/// Splits "host:port"; throws kInvalidArgument on a malformed address.
std::pair<std::string, int> parse_address(std::string_view addr);

/// Serves a Service over HTTP until stop() is called.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the address (port 0 picks a free port) and returns the port.
  /// Throws kIo when the address cannot be bound.
  int bind(const std::string& host, int port);
  /// Blocks serving requests.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace condra
