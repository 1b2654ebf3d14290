#pragma once

#include <string>
#include <vector>

#include "qk/frontend/ast.hpp"

namespace qk::frontend {

struct Token {
  enum class Kind { ident, int_lit, real_lit, str_lit, sym, newline, end };
  Kind kind;
  std::string text;  // symbol spelling, identifier, string body, or literal
  long long int_value = 0;
  double real_value = 0;
  SourcePos pos;

  bool is_sym(const char* s) const {
    return kind == Kind::sym && text == s;
  }
  bool is_ident(const char* s) const {
    return kind == Kind::ident && text == s;
  }
};

// Tokenizes a full source buffer. Newline tokens are preserved so the
// line-oriented Quil parser can group by line; the other parsers skip them.
// Comments (//, /* */, and # to end of line) are stripped here.
std::vector<Token> tokenize(const std::string& source);

}  // namespace qk::frontend
