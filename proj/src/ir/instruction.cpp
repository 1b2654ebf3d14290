#include "qk/ir/instruction.hpp"

#include <algorithm>

namespace qk::ir {

Instruction::Instruction(GateKind kind, std::vector<QubitRef> qubits,
                         std::vector<double> params,
                         std::optional<std::uint32_t> classical_target)
    : kind_(kind),
      qubits_(std::move(qubits)),
      params_(std::move(params)),
      classical_target_(classical_target) {
  const int arity = gate_arity(kind_);
  if (static_cast<int>(qubits_.size()) != arity)
    throw InvalidInstruction(gate_name(kind_) + " expects " + std::to_string(arity) +
                             " qubit operand(s), got " + std::to_string(qubits_.size()));
  const int nparams = gate_param_count(kind_);
  if (static_cast<int>(params_.size()) != nparams)
    throw InvalidInstruction(gate_name(kind_) + " expects " + std::to_string(nparams) +
                             " parameter(s), got " + std::to_string(params_.size()));
  if (arity == 2 && qubits_[0] == qubits_[1])
    throw InvalidInstruction(gate_name(kind_) + " operands must be distinct qubits");
  if (classical_target_ && kind_ != GateKind::Measure)
    throw InvalidInstruction("classical target is only valid on Measure");
}

bool Instruction::touches(QubitRef q) const {
  return std::find(qubits_.begin(), qubits_.end(), q) != qubits_.end();
}

bool Instruction::shares_qubit_with(const Instruction& other) const {
  return std::any_of(qubits_.begin(), qubits_.end(),
                     [&](QubitRef q) { return other.touches(q); });
}

Instruction gate(GateKind kind, std::uint32_t q) { return {kind, {{q}}}; }

Instruction gate(GateKind kind, std::uint32_t c, std::uint32_t t) {
  return {kind, {{c}, {t}}};
}

Instruction rot(GateKind kind, std::uint32_t q, double angle) {
  return {kind, {{q}}, {angle}};
}

Instruction rot2(GateKind kind, std::uint32_t c, std::uint32_t t, double angle) {
  return {kind, {{c}, {t}}, {angle}};
}

Instruction u3(std::uint32_t q, double theta, double phi, double lambda) {
  return {GateKind::U3, {{q}}, {theta, phi, lambda}};
}

Instruction measure(std::uint32_t q) {
  return {GateKind::Measure, {{q}}, {}, q};
}

Instruction measure(std::uint32_t q, std::uint32_t slot) {
  return {GateKind::Measure, {{q}}, {}, slot};
}

Instruction reset(std::uint32_t q) { return {GateKind::Reset, {{q}}}; }

}  // namespace qk::ir
