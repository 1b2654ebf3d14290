#pragma once

#include <map>

#include "qk/ir/circuit.hpp"

namespace qk::ir {

struct CircuitStats {
  std::size_t total_gates = 0;
  std::map<GateKind, std::size_t> histogram;
  std::size_t two_qubit_count = 0;
  // Longest dependency chain; every instruction, Measure included, occupies
  // one layer on each of its qubits.
  std::size_t depth = 0;
};

CircuitStats stats(const Circuit& c);
CircuitStats stats(const std::vector<Instruction>& instructions);

}  // namespace qk::ir
