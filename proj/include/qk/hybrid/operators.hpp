#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qk/errors.hpp"

namespace qk::hybrid {

class OperatorParseError : public Error {
 public:
  using Error::Error;
};

// One Pauli matrix acting on one qubit. axis is 'X', 'Y' or 'Z'; identity
// factors are never stored.
struct PauliFactor {
  std::uint32_t qubit = 0;
  char axis = 'Z';

  friend auto operator<=>(const PauliFactor&, const PauliFactor&) = default;
};

// Product of factors on distinct qubits, sorted by qubit index. The empty
// string is the identity.
using PauliString = std::vector<PauliFactor>;

// Complex linear combination of Pauli strings. Arithmetic keeps the form
// canonical: products reduce through the Pauli group, like terms combine,
// and coefficients below 1e-12 in magnitude are dropped.
class PauliOperator {
 public:
  static constexpr double kCoefficientTolerance = 1e-12;

  PauliOperator() = default;
  PauliOperator(double scalar);                 // NOLINT: implicit by design,
  PauliOperator(std::complex<double> scalar);   // enables 5.907 - 2.14 * X(0)

  static PauliOperator term(PauliString s, std::complex<double> coefficient);

  const std::map<PauliString, std::complex<double>>& terms() const {
    return terms_;
  }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  // 0 when the string is absent.
  std::complex<double> coefficient(const PauliString& s) const;

  // Highest qubit index + 1 over all terms; 0 for scalar or empty operators.
  std::uint32_t num_qubits() const;

  // Pauli strings are Hermitian, so Hermiticity is realness of every
  // coefficient.
  bool is_hermitian(double tol = 1e-9) const;

  std::string str() const;

  PauliOperator& operator+=(const PauliOperator& rhs);
  PauliOperator& operator-=(const PauliOperator& rhs);
  PauliOperator& operator*=(const PauliOperator& rhs);
  PauliOperator& operator*=(std::complex<double> scalar);
  PauliOperator& operator*=(double scalar) {
    return *this *= std::complex<double>(scalar);
  }

  friend bool operator==(const PauliOperator&, const PauliOperator&) = default;

 private:
  void prune();

  std::map<PauliString, std::complex<double>> terms_;
};

PauliOperator X(std::uint32_t qubit);
PauliOperator Y(std::uint32_t qubit);
PauliOperator Z(std::uint32_t qubit);

inline PauliOperator operator+(PauliOperator a, const PauliOperator& b) {
  return a += b;
}
inline PauliOperator operator-(PauliOperator a, const PauliOperator& b) {
  return a -= b;
}
inline PauliOperator operator*(PauliOperator a, const PauliOperator& b) {
  return a *= b;
}
inline PauliOperator operator*(PauliOperator a, std::complex<double> s) {
  return a *= s;
}
inline PauliOperator operator*(std::complex<double> s, PauliOperator a) {
  return a *= s;
}
inline PauliOperator operator*(PauliOperator a, double s) { return a *= s; }
inline PauliOperator operator*(double s, PauliOperator a) { return a *= s; }
inline PauliOperator operator-(PauliOperator a) { return a *= -1.0; }

// One ladder operator: creation when dagger, annihilation otherwise.
struct FermionFactor {
  std::uint32_t mode = 0;
  bool dagger = false;

  friend auto operator<=>(const FermionFactor&, const FermionFactor&) = default;
};

// Ordered product of ladder operators, exactly as written. No implicit
// normal ordering: adag(0)*a(0) and a(0)*adag(0) are distinct terms.
using FermionString = std::vector<FermionFactor>;

class FermionOperator {
 public:
  FermionOperator() = default;
  FermionOperator(double scalar);                // NOLINT: implicit by design
  FermionOperator(std::complex<double> scalar);  // (see PauliOperator)

  static FermionOperator term(FermionString s, std::complex<double> coefficient);

  const std::map<FermionString, std::complex<double>>& terms() const {
    return terms_;
  }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  std::string str() const;

  FermionOperator& operator+=(const FermionOperator& rhs);
  FermionOperator& operator-=(const FermionOperator& rhs);
  FermionOperator& operator*=(const FermionOperator& rhs);
  FermionOperator& operator*=(std::complex<double> scalar);
  FermionOperator& operator*=(double scalar) {
    return *this *= std::complex<double>(scalar);
  }

  friend bool operator==(const FermionOperator&, const FermionOperator&) = default;

 private:
  void prune();

  std::map<FermionString, std::complex<double>> terms_;
};

FermionOperator a(std::uint32_t mode);
FermionOperator adag(std::uint32_t mode);

inline FermionOperator operator+(FermionOperator x, const FermionOperator& y) {
  return x += y;
}
inline FermionOperator operator-(FermionOperator x, const FermionOperator& y) {
  return x -= y;
}
inline FermionOperator operator*(FermionOperator x, const FermionOperator& y) {
  return x *= y;
}
inline FermionOperator operator*(FermionOperator x, std::complex<double> s) {
  return x *= s;
}
inline FermionOperator operator*(std::complex<double> s, FermionOperator x) {
  return x *= s;
}
inline FermionOperator operator*(FermionOperator x, double s) { return x *= s; }
inline FermionOperator operator*(double s, FermionOperator x) { return x *= s; }

// Occupation-number convention: |1> = occupied, so the number operator maps
// to (I - Z)/2. a_j picks up a Z string on every mode below j.
PauliOperator jordan_wigner(const FermionOperator& f);

// Term grammar, terms joined by + or -:
//   pauli term:    coefficient? ([XYZ]<digits>)+  |  coefficient
//   fermion term:  coefficient? (<digits>'^'?)+   |  coefficient
// A lone coefficient is an identity term. Repeated qubits inside one term
// are legal and reduce algebraically ("X0 X0" is the identity).
PauliOperator parse_pauli(const std::string& text);
FermionOperator parse_fermion(const std::string& text);

// Kind-dispatching facade; kind is "pauli" or "fermion".
std::variant<PauliOperator, FermionOperator> parse_operator(
    const std::string& kind, const std::string& text);

}  // namespace qk::hybrid
