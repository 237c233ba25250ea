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

#include "condra/service.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "condra/condition.hpp"
#include "condra/error.hpp"
#include "condra/strategies.hpp"
#include "httplib.h"
#include "json.hpp"

namespace condra {

using json = nlohmann::ordered_json;

namespace {

std::vector<Facet> build_catalog(const Corpus& corpus) {
  std::vector<Facet> catalog;
  for (const auto& attr : corpus.attributes()) {
    if (is_passthrough_attribute(attr.name())) continue;
    Facet f{attr.name(), {}};
    const auto counts = attr.counts();
    for (std::size_t v = 0; v < counts.size(); ++v) {
      f.values.push_back({std::string(attr.values()[v]), counts[v]});
    }
    std::stable_sort(f.values.begin(), f.values.end(), [](const FacetValue& a, const FacetValue& b) {
      return a.count > b.count;  // values are already sorted, so ties stay in value order
    });
    catalog.push_back(std::move(f));
  }
  return catalog;
}

}  // namespace

CollectionHandle::CollectionHandle(std::string id_, Corpus corpus_, Tree tree_, CondIndex index_)
    : id(std::move(id_)),
      corpus(std::move(corpus_)),
      tree(std::move(tree_)),
      index(std::move(index_)),
      loaded_at(std::chrono::system_clock::now()),
      catalog(build_catalog(corpus)) {
  index.check_bound(tree, corpus);
}

std::shared_ptr<const CollectionHandle> make_collection(std::string id, Corpus corpus,
                                                        std::size_t leaf_size) {
  Tree tree = build_ball_tree(corpus, leaf_size);
  CondIndex index = build_cond_index(tree, corpus);
  return std::make_shared<const CollectionHandle>(std::move(id), std::move(corpus),
                                                  std::move(tree), std::move(index));
}

namespace {

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, std::string code, const std::string& message,
            std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(message), status(status), code(std::move(code)), position(position) {}
  int status;
  std::string code;
  std::optional<std::size_t> position;
};

Response error_response(int status, const std::string& code, const std::string& message,
                        std::optional<std::size_t> position) {
  json err{{"code", code}, {"message", message}};
  if (position) err["position"] = *position;
  return {status, json{{"error", err}}.dump()};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntax:
    case ErrorCode::kBind:
    case ErrorCode::kDimension:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kData:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    default:
      return 500;
  }
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string_view::npos ? path.size() : j;
    if (end > i) parts.push_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

std::optional<std::size_t> parse_index(std::string_view text) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

json attributes_json(const Corpus& corpus, std::size_t point) {
  json attrs = json::object();
  for (const auto& a : corpus.attributes()) {
    if (!is_passthrough_attribute(a.name())) attrs[a.name()] = a.value_of(point);
  }
  return attrs;
}

void add_passthrough(json& out, const Corpus& corpus, std::size_t point) {
  if (const Attribute* url = corpus.find_attribute("image_url")) {
    out["image_url"] = url->value_of(point);
  }
}

const CollectionHandle& require(const Service& svc, std::string_view id) {
  const CollectionHandle* c = svc.find(id);
  if (!c) throw HttpError(404, "not_found", "unknown collection '" + std::string(id) + "'");
  return *c;
}

std::size_t require_point(const CollectionHandle& c, std::string_view text) {
  const auto pid = parse_index(text);
  if (!pid || *pid >= c.corpus.size()) {
    throw HttpError(404, "not_found", "unknown point '" + std::string(text) + "'");
  }
  return *pid;
}

Response list_collections(const std::vector<std::shared_ptr<const CollectionHandle>>& all) {
  json arr = json::array();
  for (const auto& c : all) {
    json names = json::array();
    for (const auto& f : c->catalog) names.push_back(f.attribute);
    const auto t = std::chrono::system_clock::to_time_t(c->loaded_at);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    arr.push_back({{"id", c->id},
                   {"n", c->corpus.size()},
                   {"d", c->corpus.dim()},
                   {"metric", std::string(to_string(c->corpus.metric()))},
                   {"attributes", names},
                   {"loaded_at", stamp}});
  }
  return {200, json{{"collections", arr}}.dump()};
}

Response facets(const CollectionHandle& c) {
  json arr = json::array();
  for (const auto& f : c.catalog) {
    json values = json::array();
    for (const auto& v : f.values) values.push_back({{"value", v.value}, {"count", v.count}});
    arr.push_back({{"attribute", f.attribute}, {"values", values}});
  }
  return {200, json{{"collection", c.id}, {"n", c.corpus.size()}, {"facets", arr}}.dump()};
}

Response point(const CollectionHandle& c, std::string_view pid_text) {
  const std::size_t pid = require_point(c, pid_text);
  json out{{"id", pid}, {"attributes", attributes_json(c.corpus, pid)}};
  add_passthrough(out, c.corpus, pid);
  const auto row = c.corpus.row(pid);
  out["vector"] = std::vector<float>(row.begin(), row.end());
  return {200, out.dump()};
}

Response query(const CollectionHandle& c, std::string_view body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    throw HttpError(400, "invalid_argument",
                    "request body is not valid JSON (byte " + std::to_string(e.byte) + ")");
  }
  if (!req.is_object()) throw HttpError(400, "invalid_argument", "request body must be a JSON object");

  const bool has_point = req.contains("point_id") && !req["point_id"].is_null();
  const bool has_vector = req.contains("vector") && !req["vector"].is_null();
  if (has_point == has_vector) {
    throw HttpError(400, "invalid_argument", "exactly one of point_id and vector is required");
  }
  std::optional<std::size_t> pid;
  std::vector<float> q;
  if (has_point) {
    const auto& p = req["point_id"];
    if (!p.is_number_integer()) throw HttpError(400, "invalid_argument", "point_id must be an integer");
    const auto v = p.get<std::int64_t>();
    if (v < 0 || static_cast<std::size_t>(v) >= c.corpus.size()) {
      throw HttpError(404, "not_found", "unknown point '" + std::to_string(v) + "'");
    }
    pid = static_cast<std::size_t>(v);
    const auto row = c.corpus.row(*pid);
    q.assign(row.begin(), row.end());
  } else {
    const auto& v = req["vector"];
    if (!v.is_array()) throw HttpError(400, "invalid_argument", "vector must be an array of numbers");
    for (const auto& x : v) {
      if (!x.is_number()) throw HttpError(400, "invalid_argument", "vector must be an array of numbers");
      q.push_back(x.get<float>());
    }
  }

  if (!req.contains("k") || !req["k"].is_number_integer()) {
    throw HttpError(400, "invalid_argument", "k must be an integer");
  }
  const auto k_raw = req["k"].get<std::int64_t>();
  if (k_raw < 1 || k_raw > static_cast<std::int64_t>(kMaxServiceK)) {
    throw HttpError(400, "invalid_argument", "k must lie in [1, " + std::to_string(kMaxServiceK) + "]");
  }
  const auto k = static_cast<std::size_t>(k_raw);

  std::string cond_text = "ALL";
  if (req.contains("condition") && !req["condition"].is_null()) {
    if (!req["condition"].is_string()) throw HttpError(400, "invalid_argument", "condition must be a string");
    cond_text = req["condition"].get<std::string>();
  }
  Strategy strategy = Strategy::kConditional;
  if (req.contains("strategy") && !req["strategy"].is_null()) {
    if (!req["strategy"].is_string()) throw HttpError(400, "invalid_argument", "strategy must be a string");
    strategy = parse_strategy(req["strategy"].get<std::string>());
  }

  const Condition cond = parse_condition(cond_text);
  const auto resolved = resolve_node_set(c.index, c.corpus, cond, &c.cache);
  const std::size_t want = pid ? k + 1 : k;
  ResultList res;
  switch (strategy) {
    case Strategy::kConditional:
      res = cknn_query(c.tree, c.corpus, q, *resolved, want);
      break;
    case Strategy::kQueryThenFilter:
      res = query_then_filter(c.tree, c.corpus, q, resolved->members, want);
      break;
    case Strategy::kReconfigured:
      res = reconfigured_query(c.tree, c.corpus, q, *resolved, want);
      break;
    case Strategy::kBruteForce:
      res = brute_force_cknn(c.corpus, q, resolved->members, want);
      break;
    case Strategy::kDedicated:
      (void)prepare_query(c.corpus, q);
      if (!resolved->members.none()) {
        const Tree t = build_dedicated(c.corpus, resolved->members, c.tree.leaf_size());
        res = dedicated_query(t, c.corpus, q, want);
      }
      break;
    case Strategy::kBatched:
      res = batched_brute_force(c.corpus, q, 1, std::span<const IdSet>(&resolved->members, 1), want)[0][0];
      break;
  }

  json matches = json::array();
  for (const auto& nb : res.neighbors) {
    if (pid && nb.id == *pid) continue;
    if (matches.size() == k) break;
    json m{{"id", nb.id}, {"distance", nb.distance}, {"attributes", attributes_json(c.corpus, nb.id)}};
    add_passthrough(m, c.corpus, nb.id);
    matches.push_back(std::move(m));
  }
  json out{{"collection", c.id},
           {"condition", cond.to_string()},
           {"k", k},
           {"strategy", std::string(to_string(strategy))}};
  if (pid) out["point_id"] = *pid;
  out["matches"] = std::move(matches);
  return {200, out.dump()};
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

Response search(const CollectionHandle& c, const QueryParams& params) {
  const auto q_it = params.find("q");
  const std::string q = q_it == params.end() ? std::string() : q_it->second;
  if (std::all_of(q.begin(), q.end(), [](unsigned char ch) { return std::isspace(ch); })) {
    throw HttpError(400, "invalid_argument", "q must be a nonempty search string");
  }
  std::size_t limit = kDefaultSearchLimit;
  if (const auto it = params.find("limit"); it != params.end()) {
    const auto v = parse_index(it->second);
    if (!v || *v == 0) throw HttpError(400, "invalid_argument", "limit must be a positive integer");
    limit = *v;
  }
  const std::string needle = lowercase(q);
  const auto& attrs = c.corpus.attributes();
  // Match per distinct value once, then count per point.
  std::vector<std::vector<bool>> value_hit(attrs.size());
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    for (const auto& v : attrs[a].values()) {
      value_hit[a].push_back(lowercase(v).find(needle) != std::string::npos);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> hits;  // (matching attributes, id)
  for (std::size_t p = 0; p < c.corpus.size(); ++p) {
    std::size_t count = 0;
    for (std::size_t a = 0; a < attrs.size(); ++a) count += value_hit[a][attrs[a].code(p)] ? 1 : 0;
    if (count > 0) hits.emplace_back(count, p);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  json results = json::array();
  for (std::size_t i = 0; i < std::min(limit, hits.size()); ++i) {
    const auto [count, p] = hits[i];
    json r{{"id", p}, {"matched", count}, {"attributes", attributes_json(c.corpus, p)}};
    add_passthrough(r, c.corpus, p);
    results.push_back(std::move(r));
  }
  return {200, json{{"collection", c.id}, {"q", q}, {"total", hits.size()}, {"results", results}}.dump()};
}

}  // namespace

Service::Service(std::vector<std::shared_ptr<const CollectionHandle>> collections)
    : collections_(std::move(collections)) {
  for (std::size_t i = 0; i < collections_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (collections_[i]->id == collections_[j]->id) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate collection id '" + collections_[i]->id + "'");
      }
    }
  }
}

const CollectionHandle* Service::find(std::string_view id) const {
  for (const auto& c : collections_) {
    if (c->id == id) return c.get();
  }
  return nullptr;
}

Response Service::handle(std::string_view method, std::string_view path, const QueryParams& params,
                         std::string_view body) const {
  try {
    const auto parts = split_path(path);
    auto expect = [&](std::string_view m) {
      if (method != m) {
        throw HttpError(405, "method_not_allowed",
                        std::string(method) + " is not allowed on " + std::string(path));
      }
    };
    if (parts.empty() || parts[0] != "collections" || parts.size() > 4) {
      throw HttpError(404, "not_found", "no route for " + std::string(path));
    }
    if (parts.size() == 1) {
      expect("GET");
      return list_collections(collections_);
    }
    if (parts.size() == 3 && parts[2] == "facets") {
      expect("GET");
      return facets(require(*this, parts[1]));
    }
    if (parts.size() == 3 && parts[2] == "query") {
      expect("POST");
      return query(require(*this, parts[1]), body);
    }
    if (parts.size() == 3 && parts[2] == "search") {
      expect("GET");
      return search(require(*this, parts[1]), params);
    }
    if (parts.size() == 4 && parts[2] == "points") {
      expect("GET");
      return point(require(*this, parts[1]), parts[3]);
    }
    throw HttpError(404, "not_found", "no route for " + std::string(path));
  } catch (const HttpError& e) {
    return error_response(e.status, e.code, e.what(), e.position);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), std::string(to_string(e.code())), e.what(), e.position());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what(), std::nullopt);
  }
}

std::pair<std::string, int> parse_address(std::string_view addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::kInvalidArgument, "address must be host:port, got '" + std::string(addr) + "'");
  }
  const auto port = parse_index(addr.substr(colon + 1));
  if (!port || *port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "invalid port in '" + std::string(addr) + "'");
  }
  return {std::string(addr.substr(0, colon)), static_cast<int>(*port)};
}

struct HttpServer::Impl {
  const Service& service;
  httplib::Server server;

  explicit Impl(const Service& s) : service(s) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      QueryParams params(req.params.begin(), req.params.end());
      const Response r = service.handle(req.method, req.path, params, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    // SO_REUSEADDR only: httplib's default SO_REUSEPORT would let a second
    // server share a port that is already in use.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);
    server.Patch(".*", handler);
  }
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace condra
