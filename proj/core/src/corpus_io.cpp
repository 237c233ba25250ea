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

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "condra/corpus.hpp"
#include "condra/error.hpp"
#include "condra/keyvalue.hpp"

namespace condra {

namespace {

constexpr char kMagic[4] = {'C', 'N', 'D', 'R'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "corpus bundles are little-endian; big-endian hosts are not supported");

std::uint32_t read_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir) {
  const auto vec_path = dir / "vectors.bin";
  std::ifstream vin(vec_path, std::ios::binary);
  if (!vin) throw Error(ErrorCode::kIo, "cannot open " + vec_path.string());
  char header[16];
  if (!vin.read(header, 16)) throw Error(ErrorCode::kFormat, "truncated vectors.bin header");
  if (std::memcmp(header, kMagic, 4) != 0) throw Error(ErrorCode::kFormat, "bad magic in vectors.bin");
  if (read_u32(header + 4) != kVersion) {
    throw Error(ErrorCode::kFormat, "unsupported vectors.bin version " +
                                        std::to_string(read_u32(header + 4)));
  }
  const std::size_t n = read_u32(header + 8);
  const std::size_t d = read_u32(header + 12);
  if (n == 0 || d == 0) throw Error(ErrorCode::kFormat, "vectors.bin header declares n or d = 0");
  std::vector<float> data(n * d);
  vin.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 4));
  if (static_cast<std::size_t>(vin.gcount()) != data.size() * 4) {
    throw Error(ErrorCode::kFormat, "vectors.bin payload shorter than n*d floats");
  }
  if (vin.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kFormat, "vectors.bin payload longer than n*d floats");
  }

  Metric metric = Metric::kEuclidean;
  const auto cfg_path = dir / "corpus.toml";
  if (std::filesystem::exists(cfg_path)) {
    auto doc = read_key_value_file(cfg_path);
    metric = parse_metric(doc.root.get_string("metric", "euclidean"));
  }

  std::vector<Attribute> attrs;
  const auto meta_path = dir / "meta.tsv";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream min(meta_path);
    if (!min) throw Error(ErrorCode::kIo, "cannot open " + meta_path.string());
    std::string line;
    if (!std::getline(min, line)) throw Error(ErrorCode::kFormat, "meta.tsv has no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto names = split_tabs(line);
    if (names.empty() || names[0] != "id") {
      throw Error(ErrorCode::kFormat, "meta.tsv header must start with column 'id'");
    }
    std::vector<std::vector<std::string>> cols(names.size() - 1);
    std::size_t rows = 0;
    while (std::getline(min, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto cells = split_tabs(line);
      if (cells.size() != names.size()) {
        throw Error(ErrorCode::kData, "meta.tsv row " + std::to_string(rows + 1) + " has " +
                                          std::to_string(cells.size()) + " cells, expected " +
                                          std::to_string(names.size()));
      }
      if (cells[0] != std::to_string(rows)) {
        throw Error(ErrorCode::kConsistency, "meta.tsv row " + std::to_string(rows + 1) +
                                                 " has id '" + cells[0] + "'");
      }
      for (std::size_t c = 1; c < cells.size(); ++c) {
        if (cells[c].empty()) {
          throw Error(ErrorCode::kData, "missing value for '" + names[c] + "' at id " +
                                            std::to_string(rows));
        }
        cols[c - 1].push_back(std::move(cells[c]));
      }
      ++rows;
    }
    if (rows != n) {
      throw Error(ErrorCode::kConsistency, "meta.tsv has " + std::to_string(rows) +
                                               " rows but vectors.bin declares n=" +
                                               std::to_string(n));
    }
    for (std::size_t c = 0; c < cols.size(); ++c) attrs.emplace_back(names[c + 1], cols[c]);
  }
  return Corpus(std::move(data), n, d, metric, std::move(attrs));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  for (const auto& a : corpus.attributes()) {
    for (const auto& v : a.values()) {
      if (v.empty() || v.find_first_of("\t\r\n") != std::string::npos) {
        throw Error(ErrorCode::kData, "attribute '" + a.name() +
                                          "' has a value that cannot be stored in TSV");
      }
    }
  }

  {
    std::ofstream out(dir / "vectors.bin", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "vectors.bin").string());
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(corpus.size()));
    write_u32(out, static_cast<std::uint32_t>(corpus.dim()));
    out.write(reinterpret_cast<const char*>(corpus.data().data()),
              static_cast<std::streamsize>(corpus.data().size() * sizeof(float)));
    if (!out) throw Error(ErrorCode::kIo, "write failed for vectors.bin");
  }
  {
    std::ofstream out(dir / "meta.tsv", std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "meta.tsv").string());
    out << "id";
    for (const auto& a : corpus.attributes()) out << '\t' << a.name();
    out << '\n';
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      out << i;
      for (const auto& a : corpus.attributes()) out << '\t' << a.value_of(i);
      out << '\n';
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed for meta.tsv");
  }
  {
    std::ofstream out(dir / "corpus.toml", std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "corpus.toml").string());
    out << "metric = " << quote_value(to_string(corpus.metric())) << '\n';
  }
}

}  // namespace condra
