#include "qk/ir/stats.hpp"

#include <algorithm>
#include <unordered_map>

namespace qk::ir {

CircuitStats stats(const std::vector<Instruction>& instructions) {
  CircuitStats s;
  s.total_gates = instructions.size();
  std::unordered_map<std::uint32_t, std::size_t> qubit_depth;
  for (const auto& inst : instructions) {
    ++s.histogram[inst.kind()];
    if (is_two_qubit(inst.kind())) ++s.two_qubit_count;
    std::size_t layer = 0;
    for (const auto& q : inst.qubits()) layer = std::max(layer, qubit_depth[q.index]);
    ++layer;
    for (const auto& q : inst.qubits()) qubit_depth[q.index] = layer;
    s.depth = std::max(s.depth, layer);
  }
  return s;
}

CircuitStats stats(const Circuit& c) { return stats(c.flatten()); }

}  // namespace qk::ir
