#include "qk/hybrid/operators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string_view>
#include <utility>

namespace qk::hybrid {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// Product of two single-qubit Paulis: phase times a Pauli or identity
// (axis 0). Cyclic pairs give +i, anti-cyclic -i.
std::pair<std::complex<double>, char> mul1(char a, char b) {
  if (a == b) return {1.0, 0};
  auto cyclic = [](char x, char y) {
    return (x == 'X' && y == 'Y') || (x == 'Y' && y == 'Z') ||
           (x == 'Z' && y == 'X');
  };
  const char third = 'X' ^ 'Y' ^ 'Z' ^ a ^ b;
  return {cyclic(a, b) ? kI : -kI, third};
}

std::pair<std::complex<double>, PauliString> string_mul(const PauliString& a,
                                                        const PauliString& b) {
  std::complex<double> phase = 1.0;
  PauliString out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].qubit < b[j].qubit)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].qubit < a[i].qubit) {
      out.push_back(b[j++]);
    } else {
      const auto [ph, axis] = mul1(a[i].axis, b[j].axis);
      phase *= ph;
      if (axis != 0) out.push_back({a[i].qubit, axis});
      ++i;
      ++j;
    }
  }
  return {phase, std::move(out)};
}

std::string format_real(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string format_coeff(std::complex<double> c) {
  if (std::abs(c.imag()) < 1e-12) return format_real(c.real());
  std::ostringstream os;
  os << "(" << format_real(c.real()) << (c.imag() < 0 ? "" : "+")
     << format_real(c.imag()) << "i)";
  return os.str();
}

}  // namespace

PauliOperator::PauliOperator(double scalar)
    : PauliOperator(std::complex<double>(scalar)) {}

PauliOperator::PauliOperator(std::complex<double> scalar) {
  if (std::abs(scalar) > kCoefficientTolerance) terms_[{}] = scalar;
}

PauliOperator PauliOperator::term(PauliString s, std::complex<double> coefficient) {
  std::sort(s.begin(), s.end(),
            [](const PauliFactor& a, const PauliFactor& b) {
              return a.qubit < b.qubit;
            });
  // Collapse repeated qubits through the Pauli group so the invariant
  // (unique, sorted) holds no matter what the caller passed.
  PauliString reduced;
  std::complex<double> phase = 1.0;
  for (const auto& f : s) {
    if (!reduced.empty() && reduced.back().qubit == f.qubit) {
      const auto [ph, axis] = mul1(reduced.back().axis, f.axis);
      phase *= ph;
      reduced.pop_back();
      if (axis != 0) reduced.push_back({f.qubit, axis});
    } else {
      reduced.push_back(f);
    }
  }
  PauliOperator out;
  const std::complex<double> c = coefficient * phase;
  if (std::abs(c) > kCoefficientTolerance) out.terms_[std::move(reduced)] = c;
  return out;
}

std::complex<double> PauliOperator::coefficient(const PauliString& s) const {
  const auto it = terms_.find(s);
  return it == terms_.end() ? std::complex<double>(0) : it->second;
}

std::uint32_t PauliOperator::num_qubits() const {
  std::uint32_t n = 0;
  for (const auto& [s, c] : terms_)
    if (!s.empty()) n = std::max(n, s.back().qubit + 1);
  return n;
}

bool PauliOperator::is_hermitian(double tol) const {
  for (const auto& [s, c] : terms_)
    if (std::abs(c.imag()) >= tol) return false;
  return true;
}

std::string PauliOperator::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [s, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << format_coeff(c);
    for (const auto& f : s) os << " " << f.axis << f.qubit;
  }
  return os.str();
}

void PauliOperator::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= kCoefficientTolerance)
      it = terms_.erase(it);
    else
      ++it;
  }
}

PauliOperator& PauliOperator::operator+=(const PauliOperator& rhs) {
  for (const auto& [s, c] : rhs.terms_) terms_[s] += c;
  prune();
  return *this;
}

PauliOperator& PauliOperator::operator-=(const PauliOperator& rhs) {
  for (const auto& [s, c] : rhs.terms_) terms_[s] -= c;
  prune();
  return *this;
}

PauliOperator& PauliOperator::operator*=(const PauliOperator& rhs) {
  std::map<PauliString, std::complex<double>> product;
  for (const auto& [sa, ca] : terms_)
    for (const auto& [sb, cb] : rhs.terms_) {
      auto [phase, s] = string_mul(sa, sb);
      product[std::move(s)] += ca * cb * phase;
    }
  terms_ = std::move(product);
  prune();
  return *this;
}

PauliOperator& PauliOperator::operator*=(std::complex<double> scalar) {
  for (auto& [s, c] : terms_) c *= scalar;
  prune();
  return *this;
}

PauliOperator X(std::uint32_t qubit) {
  return PauliOperator::term({{qubit, 'X'}}, 1.0);
}
PauliOperator Y(std::uint32_t qubit) {
  return PauliOperator::term({{qubit, 'Y'}}, 1.0);
}
PauliOperator Z(std::uint32_t qubit) {
  return PauliOperator::term({{qubit, 'Z'}}, 1.0);
}

FermionOperator::FermionOperator(double scalar)
    : FermionOperator(std::complex<double>(scalar)) {}

FermionOperator::FermionOperator(std::complex<double> scalar) {
  if (std::abs(scalar) > PauliOperator::kCoefficientTolerance)
    terms_[{}] = scalar;
}

FermionOperator FermionOperator::term(FermionString s,
                                      std::complex<double> coefficient) {
  FermionOperator out;
  if (std::abs(coefficient) > PauliOperator::kCoefficientTolerance)
    out.terms_[std::move(s)] = coefficient;
  return out;
}

std::string FermionOperator::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [s, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << format_coeff(c);
    for (const auto& f : s) os << " " << f.mode << (f.dagger ? "^" : "");
  }
  return os.str();
}

void FermionOperator::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= PauliOperator::kCoefficientTolerance)
      it = terms_.erase(it);
    else
      ++it;
  }
}

FermionOperator& FermionOperator::operator+=(const FermionOperator& rhs) {
  for (const auto& [s, c] : rhs.terms_) terms_[s] += c;
  prune();
  return *this;
}

FermionOperator& FermionOperator::operator-=(const FermionOperator& rhs) {
  for (const auto& [s, c] : rhs.terms_) terms_[s] -= c;
  prune();
  return *this;
}

FermionOperator& FermionOperator::operator*=(const FermionOperator& rhs) {
  std::map<FermionString, std::complex<double>> product;
  for (const auto& [sa, ca] : terms_)
    for (const auto& [sb, cb] : rhs.terms_) {
      FermionString s = sa;
      s.insert(s.end(), sb.begin(), sb.end());
      product[std::move(s)] += ca * cb;
    }
  terms_ = std::move(product);
  prune();
  return *this;
}

FermionOperator& FermionOperator::operator*=(std::complex<double> scalar) {
  for (auto& [s, c] : terms_) c *= scalar;
  prune();
  return *this;
}

FermionOperator a(std::uint32_t mode) {
  return FermionOperator::term({{mode, false}}, 1.0);
}
FermionOperator adag(std::uint32_t mode) {
  return FermionOperator::term({{mode, true}}, 1.0);
}

PauliOperator jordan_wigner(const FermionOperator& f) {
  auto ladder = [](std::uint32_t mode, bool dagger) {
    PauliString zs;
    for (std::uint32_t k = 0; k < mode; ++k) zs.push_back({k, 'Z'});
    PauliString xs = zs;
    xs.push_back({mode, 'X'});
    PauliString ys = std::move(zs);
    ys.push_back({mode, 'Y'});
    // a = Z-string (X + iY)/2, a-dagger the conjugate; this sign convention
    // makes the number operator (I - Z)/2, i.e. |1> = occupied.
    return PauliOperator::term(xs, 0.5) +
           PauliOperator::term(ys, dagger ? -0.5 * kI : 0.5 * kI);
  };

  PauliOperator out;
  for (const auto& [s, c] : f.terms()) {
    PauliOperator prod{c};
    for (const auto& factor : s) prod *= ladder(factor.mode, factor.dagger);
    out += prod;
  }
  return out;
}

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw OperatorParseError(what + " at position " + std::to_string(pos));
  }
};

// Unsigned real number; signs are handled at the term-separator level.
bool parse_number(Cursor& cur, double& out) {
  if (cur.done()) return false;
  const char c = cur.peek();
  if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') return false;
  const char* begin = cur.text.c_str() + cur.pos;
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  cur.pos += static_cast<std::size_t>(end - begin);
  return true;
}

bool parse_index(Cursor& cur, std::uint32_t& out) {
  if (cur.done() || !std::isdigit(static_cast<unsigned char>(cur.peek())))
    return false;
  std::uint64_t v = 0;
  while (!cur.done() && std::isdigit(static_cast<unsigned char>(cur.peek()))) {
    v = v * 10 + static_cast<std::uint64_t>(cur.peek() - '0');
    if (v > 0xffffffffull) cur.fail("index out of range");
    ++cur.pos;
  }
  out = static_cast<std::uint32_t>(v);
  return true;
}

// Consumes an optional leading sign for the first term, or a mandatory
// separator for later ones.
bool term_sign(Cursor& cur, bool first, double& sign) {
  cur.skip_ws();
  if (cur.done()) {
    if (!first) cur.fail("expected term");
    return false;
  }
  sign = 1.0;
  if (cur.peek() == '+' || cur.peek() == '-') {
    sign = cur.peek() == '-' ? -1.0 : 1.0;
    ++cur.pos;
    cur.skip_ws();
  } else if (!first) {
    cur.fail("expected '+' or '-'");
  }
  return true;
}

}  // namespace

PauliOperator parse_pauli(const std::string& text) {
  Cursor cur{text};
  PauliOperator acc;
  bool first = true;
  while (true) {
    cur.skip_ws();
    if (cur.done() && first) break;
    double sign = 1.0;
    if (!term_sign(cur, first, sign)) break;
    first = false;

    double coeff = 1.0;
    const bool has_coeff = parse_number(cur, coeff);
    PauliOperator term_op{sign * coeff};
    bool has_factor = false;
    while (true) {
      cur.skip_ws();
      if (cur.done()) break;
      const char c = cur.peek();
      if (c != 'X' && c != 'Y' && c != 'Z') break;
      ++cur.pos;
      std::uint32_t q = 0;
      if (!parse_index(cur, q)) cur.fail("expected qubit index");
      term_op *= PauliOperator::term({{q, c}}, 1.0);
      has_factor = true;
    }
    if (!has_coeff && !has_factor) cur.fail("expected coefficient or Pauli factor");
    acc += term_op;

    cur.skip_ws();
    if (cur.done()) break;
    const char c = cur.peek();
    if (c != '+' && c != '-') cur.fail("expected '+' or '-'");
  }
  return acc;
}

FermionOperator parse_fermion(const std::string& text) {
  Cursor cur{text};
  FermionOperator acc;
  bool first = true;
  while (true) {
    cur.skip_ws();
    if (cur.done() && first) break;
    double sign = 1.0;
    if (!term_sign(cur, first, sign)) break;
    first = false;

    // Scan the term's numeric tokens; a token glued to '^' is always a
    // factor, and a leading real (or an integer followed by more tokens)
    // is the coefficient.
    struct Token {
      double value;
      bool integral;
      bool dagger;
      std::size_t pos;
    };
    std::vector<Token> tokens;
    while (true) {
      cur.skip_ws();
      if (cur.done()) break;
      const char c = cur.peek();
      if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') break;
      Token tok{0, true, false, cur.pos};
      const std::size_t start = cur.pos;
      if (!parse_number(cur, tok.value)) cur.fail("expected number");
      const std::string_view raw(text.data() + start, cur.pos - start);
      tok.integral = raw.find_first_of(".eE") == std::string_view::npos;
      if (!cur.done() && cur.peek() == '^') {
        tok.dagger = true;
        ++cur.pos;
      }
      tokens.push_back(tok);
    }
    if (tokens.empty()) cur.fail("expected coefficient or mode index");

    std::size_t factor_begin = 0;
    double coeff = 1.0;
    const Token& head = tokens.front();
    if (!head.dagger && (!head.integral || tokens.size() > 1)) {
      coeff = head.value;
      factor_begin = 1;
    }
    FermionOperator term_op{sign * coeff};
    for (std::size_t i = factor_begin; i < tokens.size(); ++i) {
      const Token& tok = tokens[i];
      if (!tok.integral)
        throw OperatorParseError("expected mode index at position " +
                                 std::to_string(tok.pos));
      term_op *= FermionOperator::term(
          {{static_cast<std::uint32_t>(tok.value), tok.dagger}}, 1.0);
    }
    acc += term_op;

    cur.skip_ws();
    if (cur.done()) break;
    const char c = cur.peek();
    if (c != '+' && c != '-') cur.fail("expected '+' or '-'");
  }
  return acc;
}

std::variant<PauliOperator, FermionOperator> parse_operator(
    const std::string& kind, const std::string& text) {
  if (kind == "pauli") return parse_pauli(text);
  if (kind == "fermion") return parse_fermion(text);
  throw OperatorParseError("unknown operator kind '" + kind + "'");
}

}  // namespace qk::hybrid
