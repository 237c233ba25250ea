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

#include "condra/condition.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "condra/corpus.hpp"
#include "condra/error.hpp"

namespace condra {

Condition Condition::all() { return Condition{}; }

Condition Condition::term(std::string attribute, std::string value) {
  Condition c;
  c.kind_ = Kind::kTerm;
  c.attribute_ = std::move(attribute);
  c.value_ = std::move(value);
  return c;
}

Condition Condition::negate(Condition operand) {
  bool ok = operand.kind_ == Kind::kTerm;
  if (operand.kind_ == Kind::kOr) {
    ok = std::all_of(operand.operands_.begin(), operand.operands_.end(), [&](const Condition& t) {
      return t.kind_ == Kind::kTerm && t.attribute_ == operand.operands_.front().attribute_;
    });
  }
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                "NOT applies only to a term or an OR of terms over one attribute");
  }
  Condition c;
  c.kind_ = Kind::kNot;
  c.operands_.push_back(std::move(operand));
  return c;
}

namespace {

Condition combine(Condition::Kind kind, std::vector<Condition> operands) {
  if (operands.empty()) throw Error(ErrorCode::kInvalidArgument, "AND/OR needs operands");
  if (operands.size() == 1) return std::move(operands.front());
  std::vector<Condition> flat;
  for (auto& op : operands) {
    if (op.kind() == kind) {
      flat.insert(flat.end(), op.operands().begin(), op.operands().end());
    } else {
      flat.push_back(std::move(op));
    }
  }
  return kind == Condition::Kind::kAnd ? Condition::conjunction(std::move(flat))
                                       : Condition::disjunction(std::move(flat));
}

bool is_composite(const Condition& c) {
  return c.kind() == Condition::Kind::kAnd || c.kind() == Condition::Kind::kOr;
}

}  // namespace

Condition Condition::conjunction(std::vector<Condition> operands) {
  bool nested = std::any_of(operands.begin(), operands.end(),
                            [](const Condition& c) { return c.kind_ == Kind::kAnd; });
  if (nested || operands.size() <= 1) return combine(Kind::kAnd, std::move(operands));
  Condition c;
  c.kind_ = Kind::kAnd;
  c.operands_ = std::move(operands);
  return c;
}

Condition Condition::disjunction(std::vector<Condition> operands) {
  bool nested = std::any_of(operands.begin(), operands.end(),
                            [](const Condition& c) { return c.kind_ == Kind::kOr; });
  if (nested || operands.size() <= 1) return combine(Kind::kOr, std::move(operands));
  Condition c;
  c.kind_ = Kind::kOr;
  c.operands_ = std::move(operands);
  return c;
}

std::string quote_condition_value(std::string_view value) {
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

namespace {

// Canonical text plus whether it joins more than one distinct operand, which
// decides if an enclosing operator must parenthesize it.
std::pair<std::string, bool> canonical_form(const Condition& c) {
  switch (c.kind()) {
    case Condition::Kind::kAll:
      return {"all", false};
    case Condition::Kind::kTerm:
      return {c.attribute() + "=" + quote_condition_value(c.value()), false};
    case Condition::Kind::kNot: {
      const auto [inner, composite] = canonical_form(c.operands().front());
      return {composite ? "not (" + inner + ")" : "not " + inner, false};
    }
    case Condition::Kind::kAnd:
    case Condition::Kind::kOr: {
      std::vector<std::string> parts;
      for (const auto& op : c.operands()) {
        const auto [inner, composite] = canonical_form(op);
        parts.push_back(composite ? "(" + inner + ")" : inner);
      }
      std::sort(parts.begin(), parts.end());
      parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
      if (parts.size() == 1) {
        const std::string& only = parts.front();
        const bool wrapped = only.front() == '(';
        return {wrapped ? only.substr(1, only.size() - 2) : only, wrapped};
      }
      const std::string sep = c.kind() == Condition::Kind::kAnd ? " and " : " or ";
      std::string out;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
      }
      return {out, true};
    }
  }
  return {};
}

}  // namespace

std::string Condition::canonical() const { return canonical_form(*this).first; }

std::string Condition::to_string() const {
  switch (kind_) {
    case Kind::kAll:
      return "ALL";
    case Kind::kTerm:
      return attribute_ + "=" + quote_condition_value(value_);
    case Kind::kNot: {
      const auto& op = operands_.front();
      return is_composite(op) ? "NOT (" + op.to_string() + ")" : "NOT " + op.to_string();
    }
    case Kind::kAnd:
    case Kind::kOr: {
      std::string out;
      for (std::size_t i = 0; i < operands_.size(); ++i) {
        if (i) out += kind_ == Kind::kAnd ? " AND " : " OR ";
        const auto& op = operands_[i];
        out += is_composite(op) ? "(" + op.to_string() + ")" : op.to_string();
      }
      return out;
    }
  }
  return {};
}

namespace {

enum class Tok { kIdent, kString, kEquals, kLParen, kRParen, kAnd, kOr, kNot, kAll, kEnd };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '=') { out.push_back({Tok::kEquals, "=", i++}); continue; }
    if (c == '(') { out.push_back({Tok::kLParen, "(", i++}); continue; }
    if (c == ')') { out.push_back({Tok::kRParen, ")", i++}); continue; }
    if (c == '"') {
      const std::size_t start = i++;
      std::string value;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '\\') {
          if (i + 1 >= text.size()) break;
          value.push_back(text[i + 1]);
          i += 2;
        } else if (text[i] == '"') {
          closed = true;
          ++i;
          break;
        } else {
          value.push_back(text[i++]);
        }
      }
      if (!closed) throw Error(ErrorCode::kSyntax, "unterminated string", start);
      out.push_back({Tok::kString, std::move(value), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
        ++i;
      }
      std::string word(text.substr(start, i - start));
      Tok kind = Tok::kIdent;
      if (iequals(word, "and")) kind = Tok::kAnd;
      else if (iequals(word, "or")) kind = Tok::kOr;
      else if (iequals(word, "not")) kind = Tok::kNot;
      else if (iequals(word, "all")) kind = Tok::kAll;
      out.push_back({kind, std::move(word), start});
      continue;
    }
    throw Error(ErrorCode::kSyntax, std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({Tok::kEnd, "", text.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Condition parse() {
    Condition c = parse_or();
    if (peek().kind != Tok::kEnd) fail("unexpected '" + peek().text + "'");
    return c;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kSyntax, what, peek().pos);
  }

  Condition parse_or() {
    std::vector<Condition> ops;
    ops.push_back(parse_and());
    while (peek().kind == Tok::kOr) {
      next();
      ops.push_back(parse_and());
    }
    return Condition::disjunction(std::move(ops));
  }

  Condition parse_and() {
    std::vector<Condition> ops;
    ops.push_back(parse_unary());
    while (peek().kind == Tok::kAnd) {
      next();
      ops.push_back(parse_unary());
    }
    return Condition::conjunction(std::move(ops));
  }

  Condition parse_unary() {
    if (peek().kind == Tok::kNot) {
      const std::size_t at = next().pos;
      Condition operand = parse_primary();
      try {
        return Condition::negate(std::move(operand));
      } catch (const Error& e) {
        throw Error(ErrorCode::kSyntax, e.what(), at);
      }
    }
    return parse_primary();
  }

  Condition parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kAll:
        next();
        return Condition::all();
      case Tok::kLParen: {
        next();
        Condition inner = parse_or();
        if (peek().kind != Tok::kRParen) fail("expected ')'");
        next();
        return inner;
      }
      case Tok::kIdent: {
        std::string attr = next().text;
        if (peek().kind != Tok::kEquals) fail("expected '=' after attribute '" + attr + "'");
        next();
        if (peek().kind != Tok::kString) fail("expected quoted value");
        return Condition::term(std::move(attr), next().text);
      }
      case Tok::kEnd:
        fail("unexpected end of condition");
      default:
        fail("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Condition parse_condition(std::string_view text) { return Parser(tokenize(text)).parse(); }

void bind_condition(const Condition& condition, const Corpus& corpus) {
  if (condition.kind() == Condition::Kind::kTerm) {
    corpus.attribute(condition.attribute());
    return;
  }
  for (const auto& op : condition.operands()) bind_condition(op, corpus);
}

IdSet condition_members(const Condition& condition, const Corpus& corpus) {
  const std::size_t n = corpus.size();
  switch (condition.kind()) {
    case Condition::Kind::kAll:
      return IdSet(n, true);
    case Condition::Kind::kTerm: {
      const Attribute& attr = corpus.attribute(condition.attribute());
      IdSet out(n);
      if (auto code = attr.find(condition.value())) {
        const auto codes = attr.codes();
        for (std::size_t i = 0; i < n; ++i) {
          if (codes[i] == *code) out.set(i);
        }
      }
      return out;
    }
    case Condition::Kind::kNot:
      // Every point carries a value for every attribute, so the complement
      // within the attribute's domain is the plain complement.
      return condition_members(condition.operands().front(), corpus).complement();
    case Condition::Kind::kAnd: {
      IdSet out = condition_members(condition.operands().front(), corpus);
      for (std::size_t i = 1; i < condition.operands().size(); ++i) {
        out &= condition_members(condition.operands()[i], corpus);
      }
      return out;
    }
    case Condition::Kind::kOr: {
      // Terms over one attribute are answered together in a single scan.
      IdSet out(n);
      std::vector<std::vector<bool>> wanted(corpus.attributes().size());
      for (const auto& op : condition.operands()) {
        if (op.kind() != Condition::Kind::kTerm) {
          out |= condition_members(op, corpus);
          continue;
        }
        const Attribute& attr = corpus.attribute(op.attribute());
        const std::size_t a = static_cast<std::size_t>(&attr - corpus.attributes().data());
        if (wanted[a].empty()) wanted[a].assign(attr.cardinality(), false);
        if (auto code = attr.find(op.value())) wanted[a][*code] = true;
      }
      for (std::size_t a = 0; a < wanted.size(); ++a) {
        if (wanted[a].empty()) continue;
        const auto codes = corpus.attributes()[a].codes();
        for (std::size_t i = 0; i < n; ++i) {
          if (wanted[a][codes[i]]) out.set(i);
        }
      }
      return out;
    }
  }
  return IdSet(n);
}

bool matches(const Condition& condition, const Corpus& corpus, std::size_t point) {
  switch (condition.kind()) {
    case Condition::Kind::kAll:
      return true;
    case Condition::Kind::kTerm:
      return corpus.attribute(condition.attribute()).value_of(point) == condition.value();
    case Condition::Kind::kNot:
      return !matches(condition.operands().front(), corpus, point);
    case Condition::Kind::kAnd:
      return std::all_of(condition.operands().begin(), condition.operands().end(),
                         [&](const Condition& c) { return matches(c, corpus, point); });
    case Condition::Kind::kOr:
      return std::any_of(condition.operands().begin(), condition.operands().end(),
                         [&](const Condition& c) { return matches(c, corpus, point); });
  }
  return false;
}

}  // namespace condra
