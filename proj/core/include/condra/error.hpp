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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace condra {

enum class ErrorCode {
  kFormat,        // malformed file header or payload
  kConsistency,   // parts of a bundle disagree with each other
  kData,          // NaN/Inf coordinates, missing attribute values
  kIo,            // filesystem failure
  kDimension,     // vector dimension mismatch
  kSyntax,        // condition DSL syntax error
  kBind,          // condition names an attribute the corpus lacks
  kInvalidArgument,
  kEmpty,         // operation undefined on an empty set
  kMismatch,      // structure built over a different corpus / metric
  kNotFound,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> position = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  // Byte offset into the condition text for kSyntax errors.
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

}  // namespace condra
