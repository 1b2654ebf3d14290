#pragma once

#include <string>

#include "qk/ir/circuit.hpp"

namespace qk::ir {

// Deterministic one-instruction-per-line listing, e.g.
//   H q0
//   CX q0,q1
//   Rz(0.5) q0
//   Measure q0
// The format is stable; golden tests depend on it byte for byte.
std::string format_instruction(const Instruction& inst);
std::string print_circuit(const Circuit& c);
std::string print_circuit(const std::vector<Instruction>& instructions);

// Shortest decimal form that still round-trips a double, used everywhere a
// parameter value reaches user-visible output.
std::string format_double(double v);

}  // namespace qk::ir
