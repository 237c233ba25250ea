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

#include "condra/error.hpp"

namespace condra {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kConsistency: return "consistency";
    case ErrorCode::kData: return "data";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kDimension: return "dimension_mismatch";
    case ErrorCode::kSyntax: return "condition_syntax";
    case ErrorCode::kBind: return "unknown_attribute";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kEmpty: return "empty";
    case ErrorCode::kMismatch: return "mismatch";
    case ErrorCode::kNotFound: return "not_found";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> position)
    : std::runtime_error(message), code_(code), position_(position) {}

}  // namespace condra
