#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qk/errors.hpp"
#include "qk/ir/gate.hpp"

namespace qk::ir {

class InvalidInstruction : public Error {
 public:
  using Error::Error;
};

// One gate application. Angles are stored exactly as given; passes are the
// only place where values are reduced mod 2*pi.
class Instruction {
 public:
  // Validates operand count against the gate arity, parameter count against
  // the gate signature, and pairwise distinctness of qubit operands.
  Instruction(GateKind kind, std::vector<QubitRef> qubits,
              std::vector<double> params = {},
              std::optional<std::uint32_t> classical_target = std::nullopt);

  GateKind kind() const { return kind_; }
  const std::vector<QubitRef>& qubits() const { return qubits_; }
  const std::vector<double>& params() const { return params_; }

  // Classical bit slot written by Measure. Defaults to the measured qubit's
  // index at instantiation; OpenQASM "measure q[i] -> c[j]" overrides it.
  std::optional<std::uint32_t> classical_target() const { return classical_target_; }

  bool touches(QubitRef q) const;
  bool shares_qubit_with(const Instruction& other) const;

  friend bool operator==(const Instruction&, const Instruction&) = default;

 private:
  GateKind kind_;
  std::vector<QubitRef> qubits_;
  std::vector<double> params_;
  std::optional<std::uint32_t> classical_target_;
};

// Convenience builders used all over the tests and synthesis code. The
// parameterized forms have distinct names so integer literals never make the
// overloads ambiguous.
Instruction gate(GateKind kind, std::uint32_t q);
Instruction gate(GateKind kind, std::uint32_t c, std::uint32_t t);
Instruction rot(GateKind kind, std::uint32_t q, double angle);
Instruction rot2(GateKind kind, std::uint32_t c, std::uint32_t t, double angle);
Instruction u3(std::uint32_t q, double theta, double phi, double lambda);
Instruction measure(std::uint32_t q);
Instruction measure(std::uint32_t q, std::uint32_t slot);
Instruction reset(std::uint32_t q);

}  // namespace qk::ir
