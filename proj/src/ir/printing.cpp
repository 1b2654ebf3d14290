#include "qk/ir/printing.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace qk::ir {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string format_instruction(const Instruction& inst) {
  std::string out = gate_name(inst.kind());
  if (!inst.params().empty()) {
    out += '(';
    for (std::size_t i = 0; i < inst.params().size(); ++i) {
      if (i) out += ',';
      out += format_double(inst.params()[i]);
    }
    out += ')';
  }
  out += ' ';
  for (std::size_t i = 0; i < inst.qubits().size(); ++i) {
    if (i) out += ',';
    out += 'q';
    out += std::to_string(inst.qubits()[i].index);
  }
  return out;
}

std::string print_circuit(const std::vector<Instruction>& instructions) {
  std::string out;
  for (const auto& inst : instructions) {
    out += format_instruction(inst);
    out += '\n';
  }
  return out;
}

std::string print_circuit(const Circuit& c) { return print_circuit(c.flatten()); }

}  // namespace qk::ir
