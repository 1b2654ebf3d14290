#pragma once

#include "qk/ir/circuit.hpp"

namespace qk::ir {

class AdjointOfNonUnitary : public Error {
 public:
  using Error::Error;
};

class ControlOfNonUnitary : public Error {
 public:
  using Error::Error;
};

// Inverse circuit: flattened gate list reversed with each gate inverted.
// Throws AdjointOfNonUnitary when the circuit contains Measure or Reset.
Circuit adjoint(const Circuit& c);

Instruction adjoint_instruction(const Instruction& inst);

// Circuit applying c exactly when qubit ctrl is set. Gates whose controlled
// form is not in the gate set expand into CX networks: generic single-qubit
// gates via the ABC corollary, doubly-controlled gates via the standard
// Toffoli and square-root constructions. The result is phase-exact, i.e. its
// unitary is block-diag(I, U) on the (ctrl, rest) factorization, not merely
// phase-equivalent to it.
Circuit controlled(const Circuit& c, QubitRef ctrl);

std::vector<Instruction> controlled_instruction(const Instruction& inst, QubitRef ctrl);

// Multi-controlled single-qubit gate, expanded by iterating `controlled`.
// polarity[i] == false inverts control i (active when the qubit is 0).
std::vector<Instruction> multi_controlled(const Instruction& single_qubit_gate,
                                          const std::vector<QubitRef>& controls,
                                          const std::vector<bool>& polarity);

}  // namespace qk::ir
