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

#include <string>
#include <string_view>
#include <vector>

#include "condra/bitset.hpp"

namespace condra {

class Corpus;

/// Boolean predicate over categorical attributes:
///
///   expr  := or
///   or    := and ("OR" and)*
///   and   := unary ("AND" unary)*
///   unary := ["NOT"] (term | "(" expr ")")
///   term  := ident "=" "\"value\"" | "ALL"
///
/// NOT is limited to a single term or a disjunction of terms over one
/// attribute, so it always means "any other value of that attribute".
class Condition {
 public:
  enum class Kind { kAll, kTerm, kNot, kAnd, kOr };

  static Condition all();
  static Condition term(std::string attribute, std::string value);
  /// Throws ErrorCode::kInvalidArgument when `operand` is not a term or a
  /// single-attribute disjunction of terms.
  static Condition negate(Condition operand);
  /// Nested conjunctions are flattened; a single operand is returned as is.
  static Condition conjunction(std::vector<Condition> operands);
  static Condition disjunction(std::vector<Condition> operands);

  Kind kind() const noexcept { return kind_; }
  const std::string& attribute() const noexcept { return attribute_; }
  const std::string& value() const noexcept { return value_; }
  const std::vector<Condition>& operands() const noexcept { return operands_; }

  /// Normal form used as the node-set cache key: lowercase keywords, sorted
  /// and de-duplicated AND/OR operands, single spaces. Parses back to an
  /// equivalent condition.
  std::string canonical() const;
  /// DSL text preserving operand order.
  std::string to_string() const;

  friend bool operator==(const Condition&, const Condition&) = default;

 private:
  Kind kind_ = Kind::kAll;
  std::string attribute_;
  std::string value_;
  std::vector<Condition> operands_;
};

/// Throws Error(kSyntax) with the byte offset of the offending token.
Condition parse_condition(std::string_view text);

/// Throws Error(kBind) if the condition names an attribute `corpus` lacks.
void bind_condition(const Condition& condition, const Corpus& corpus);

/// Points satisfying the condition. Unknown values match nothing.
IdSet condition_members(const Condition& condition, const Corpus& corpus);

/// Evaluates the condition for one point.
bool matches(const Condition& condition, const Corpus& corpus, std::size_t point);

/// Quotes a value for the DSL.
std::string quote_condition_value(std::string_view value);

}  // namespace condra
