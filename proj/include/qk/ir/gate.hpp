#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace qk::ir {

// Closed gate set of the IR. Every frontend construct and every synthesis
// routine lowers into these kinds; backends and passes switch over them
// exhaustively.
enum class GateKind : std::uint8_t {
  H,
  X,
  Y,
  Z,
  S,
  Sdg,
  T,
  Tdg,
  Rx,
  Ry,
  Rz,
  U1,
  U3,
  CX,
  CY,
  CZ,
  CH,
  CPhase,
  CRz,
  Swap,
  Measure,
  Reset,
};

// Number of qubit operands. 1 or 2 for every kind.
int gate_arity(GateKind k);

// Number of real parameters (angles). 0, 1 or 3.
int gate_param_count(GateKind k);

// Canonical spelling, also used by the textual printer.
const std::string& gate_name(GateKind k);

// Reverse lookup by canonical name. "CNOT" is accepted as an alias for CX.
std::optional<GateKind> gate_from_name(const std::string& name);

bool is_two_qubit(GateKind k);

// Measure and Reset are the only non-unitary kinds.
bool is_unitary_gate(GateKind k);

// Reference to a qubit in the flat index space of an execution buffer.
// Register names exist only at the source level; instantiation resolves
// them to indices before the IR is built.
struct QubitRef {
  std::uint32_t index = 0;

  friend bool operator==(const QubitRef&, const QubitRef&) = default;
  friend auto operator<=>(const QubitRef&, const QubitRef&) = default;
};

}  // namespace qk::ir
