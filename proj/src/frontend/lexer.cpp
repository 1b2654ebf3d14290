#include "qk/frontend/lexer.hpp"

#include <cctype>
#include <cstdlib>

namespace qk::frontend {

namespace {

const char* kTwoCharSyms[] = {"::", "++", "--", "<<", ">>", "<=", ">=",
                              "==", "!=", "&&", "||", "->"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> tokenize(const std::string& source) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  const std::size_t n = source.size();

  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k && i < n; ++j, ++i) {
      if (source[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < n) {
    char c = source[i];
    SourcePos pos{line, col};

    if (c == '\n') {
      out.push_back({Token::Kind::newline, "\n", 0, 0, pos});
      advance(1);
      continue;
    }
    if (c == '\r' || c == ' ' || c == '\t' || c == '\f' || c == '\v') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < n && source[i + 1] == '/') {
      while (i < n && source[i] != '\n') advance(1);
      continue;
    }
    if (c == '#') {
      while (i < n && source[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < n && source[i + 1] == '*') {
      advance(2);
      while (i < n && !(source[i] == '*' && i + 1 < n && source[i + 1] == '/'))
        advance(1);
      if (i >= n) throw SyntaxError("unterminated block comment", pos);
      advance(2);
      continue;
    }
    if (c == '"') {
      advance(1);
      std::string body;
      while (i < n && source[i] != '"' && source[i] != '\n') {
        body.push_back(source[i]);
        advance(1);
      }
      if (i >= n || source[i] != '"')
        throw SyntaxError("unterminated string literal", pos);
      advance(1);
      out.push_back({Token::Kind::str_lit, body, 0, 0, pos});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(source[i + 1])))) {
      std::size_t j = i;
      bool is_real = false;
      while (j < n && std::isdigit(static_cast<unsigned char>(source[j]))) ++j;
      if (j < n && source[j] == '.') {
        is_real = true;
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(source[j]))) ++j;
      }
      if (j < n && (source[j] == 'e' || source[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (source[k] == '+' || source[k] == '-')) ++k;
        if (k < n && std::isdigit(static_cast<unsigned char>(source[k]))) {
          is_real = true;
          j = k;
          while (j < n && std::isdigit(static_cast<unsigned char>(source[j]))) ++j;
        }
      }
      std::string text = source.substr(i, j - i);
      Token t;
      t.pos = pos;
      t.text = text;
      errno = 0;
      if (is_real) {
        t.kind = Token::Kind::real_lit;
        t.real_value = std::strtod(text.c_str(), nullptr);
      } else {
        t.kind = Token::Kind::int_lit;
        char* endp = nullptr;
        t.int_value = std::strtoll(text.c_str(), &endp, 10);
        if (errno == ERANGE)
          throw SyntaxError("integer literal out of range: " + text, pos);
      }
      out.push_back(t);
      advance(j - i);
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < n && ident_char(source[j])) ++j;
      out.push_back({Token::Kind::ident, source.substr(i, j - i), 0, 0, pos});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* sym : kTwoCharSyms) {
      if (c == sym[0] && i + 1 < n && source[i + 1] == sym[1]) {
        out.push_back({Token::Kind::sym, sym, 0, 0, pos});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string kOneCharSyms = "{}()[];,.=<>+-*/%!&|^:?~@$";
    if (kOneCharSyms.find(c) != std::string::npos) {
      out.push_back({Token::Kind::sym, std::string(1, c), 0, 0, pos});
      advance(1);
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
  }
  out.push_back({Token::Kind::end, "", 0, 0, {line, col}});
  return out;
}

}  // namespace qk::frontend
