#include "qk/ir/transforms.hpp"

#include <cmath>

#include "qk/ir/unitary.hpp"

namespace qk::ir {

namespace {

// N&C figure 4.9: Toffoli over {H, T, Tdg, CX} with six CX gates.
std::vector<Instruction> toffoli(QubitRef a, QubitRef b, QubitRef c) {
  const auto A = a.index, B = b.index, C = c.index;
  return {
      gate(GateKind::H, C),        gate(GateKind::CX, B, C),
      gate(GateKind::Tdg, C),      gate(GateKind::CX, A, C),
      gate(GateKind::T, C),        gate(GateKind::CX, B, C),
      gate(GateKind::Tdg, C),      gate(GateKind::CX, A, C),
      gate(GateKind::T, B),        gate(GateKind::T, C),
      gate(GateKind::H, C),        gate(GateKind::CX, A, B),
      gate(GateKind::T, A),        gate(GateKind::Tdg, B),
      gate(GateKind::CX, A, B),
  };
}

// Controlled version of an arbitrary single-qubit unitary u on (ctrl, t).
// With u = exp(i*alpha) Rz(beta) Ry(gamma) Rz(delta), the ABC corollary gives
//   A = Rz(beta) Ry(gamma/2), B = Ry(-gamma/2) Rz(-(delta+beta)/2),
//   C = Rz((delta-beta)/2),  A B C = I,  A X B X C = exp(-i*alpha) u,
// so C-u = [C, CX, B, CX, A] plus a U1(alpha) phase on the control.
std::vector<Instruction> abc_controlled(const Eigen::Matrix2cd& u, QubitRef ctrl,
                                        QubitRef t) {
  const ZyzAngles e = zyz_decompose(u);
  std::vector<Instruction> out;
  out.push_back(rot(GateKind::Rz, t.index, (e.delta - e.beta) / 2));
  out.push_back(gate(GateKind::CX, ctrl.index, t.index));
  out.push_back(rot(GateKind::Rz, t.index, -(e.delta + e.beta) / 2));
  out.push_back(rot(GateKind::Ry, t.index, -e.gamma / 2));
  out.push_back(gate(GateKind::CX, ctrl.index, t.index));
  out.push_back(rot(GateKind::Ry, t.index, e.gamma / 2));
  out.push_back(rot(GateKind::Rz, t.index, e.beta));
  if (std::abs(e.alpha) > 1e-15)
    out.push_back(rot(GateKind::U1, ctrl.index, e.alpha));
  return out;
}

// CC-U from a controlled square root: with V*V = U,
//   CC-U = [CV(c2,t), CX(c1,c2), CVdg(c2,t), CX(c1,c2), CV(c1,t)].
// Used for the kinds whose controlled form stays in the gate set.
std::vector<Instruction> cc_via_sqrt(GateKind kind, double half_angle, QubitRef c1,
                                     QubitRef c2, QubitRef t) {
  return {
      rot2(kind, c2.index, t.index, half_angle),
      gate(GateKind::CX, c1.index, c2.index),
      rot2(kind, c2.index, t.index, -half_angle),
      gate(GateKind::CX, c1.index, c2.index),
      rot2(kind, c1.index, t.index, half_angle),
  };
}

void append(std::vector<Instruction>& out, std::vector<Instruction> tail) {
  for (auto& inst : tail) out.push_back(std::move(inst));
}

}  // namespace

Instruction adjoint_instruction(const Instruction& inst) {
  const auto& q = inst.qubits();
  const auto& p = inst.params();
  switch (inst.kind()) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::CX:
    case GateKind::CY:
    case GateKind::CZ:
    case GateKind::CH:
    case GateKind::Swap:
      return inst;
    case GateKind::S:
      return {GateKind::Sdg, q};
    case GateKind::Sdg:
      return {GateKind::S, q};
    case GateKind::T:
      return {GateKind::Tdg, q};
    case GateKind::Tdg:
      return {GateKind::T, q};
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::Rz:
    case GateKind::U1:
    case GateKind::CPhase:
    case GateKind::CRz:
      return {inst.kind(), q, {-p[0]}};
    case GateKind::U3:
      return {GateKind::U3, q, {-p[0], -p[2], -p[1]}};
    case GateKind::Measure:
    case GateKind::Reset:
      throw AdjointOfNonUnitary("cannot invert " + gate_name(inst.kind()));
  }
  throw Error("unhandled gate kind");
}

Circuit adjoint(const Circuit& c) {
  auto flat = c.flatten();
  Circuit out(c.name() + "_adjoint");
  for (auto it = flat.rbegin(); it != flat.rend(); ++it)
    out.add(adjoint_instruction(*it));
  return out;
}

std::vector<Instruction> controlled_instruction(const Instruction& inst,
                                                QubitRef ctrl) {
  if (inst.touches(ctrl))
    throw InvalidInstruction("control qubit q" + std::to_string(ctrl.index) +
                             " overlaps gate operand");
  const auto& q = inst.qubits();
  const auto& p = inst.params();
  const auto c = ctrl.index;
  switch (inst.kind()) {
    case GateKind::X:
      return {gate(GateKind::CX, c, q[0].index)};
    case GateKind::Y:
      return {gate(GateKind::CY, c, q[0].index)};
    case GateKind::Z:
      return {gate(GateKind::CZ, c, q[0].index)};
    case GateKind::H:
      return {gate(GateKind::CH, c, q[0].index)};
    case GateKind::S:
      return {rot2(GateKind::CPhase, c, q[0].index, M_PI / 2)};
    case GateKind::Sdg:
      return {rot2(GateKind::CPhase, c, q[0].index, -M_PI / 2)};
    case GateKind::T:
      return {rot2(GateKind::CPhase, c, q[0].index, M_PI / 4)};
    case GateKind::Tdg:
      return {rot2(GateKind::CPhase, c, q[0].index, -M_PI / 4)};
    case GateKind::U1:
      return {rot2(GateKind::CPhase, c, q[0].index, p[0])};
    case GateKind::Rz:
      return {rot2(GateKind::CRz, c, q[0].index, p[0])};
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::U3:
      return abc_controlled(gate_matrix_1q(inst.kind(), p), ctrl, q[0]);
    case GateKind::CX:
      return toffoli(ctrl, q[0], q[1]);
    case GateKind::CY: {
      std::vector<Instruction> out{gate(GateKind::Sdg, q[1].index)};
      append(out, toffoli(ctrl, q[0], q[1]));
      out.push_back(gate(GateKind::S, q[1].index));
      return out;
    }
    case GateKind::CZ: {
      std::vector<Instruction> out{gate(GateKind::H, q[1].index)};
      append(out, toffoli(ctrl, q[0], q[1]));
      out.push_back(gate(GateKind::H, q[1].index));
      return out;
    }
    case GateKind::CH: {
      // H = A X Adg with A = Ry(-pi/4), so CCH conjugates a Toffoli by Ry.
      std::vector<Instruction> out{rot(GateKind::Ry, q[1].index, M_PI / 4)};
      append(out, toffoli(ctrl, q[0], q[1]));
      out.push_back(rot(GateKind::Ry, q[1].index, -M_PI / 4));
      return out;
    }
    case GateKind::CPhase:
      return cc_via_sqrt(GateKind::CPhase, p[0] / 2, ctrl, q[0], q[1]);
    case GateKind::CRz:
      return cc_via_sqrt(GateKind::CRz, p[0] / 2, ctrl, q[0], q[1]);
    case GateKind::Swap: {
      std::vector<Instruction> out{gate(GateKind::CX, q[1].index, q[0].index)};
      append(out, toffoli(ctrl, q[0], q[1]));
      out.push_back(gate(GateKind::CX, q[1].index, q[0].index));
      return out;
    }
    case GateKind::Measure:
    case GateKind::Reset:
      throw ControlOfNonUnitary("cannot control " + gate_name(inst.kind()));
  }
  throw Error("unhandled gate kind");
}

Circuit controlled(const Circuit& c, QubitRef ctrl) {
  Circuit out(c.name() + "_ctrl");
  for (const auto& inst : c.flatten())
    out.add_all(controlled_instruction(inst, ctrl));
  return out;
}

std::vector<Instruction> multi_controlled(const Instruction& single_qubit_gate,
                                          const std::vector<QubitRef>& controls,
                                          const std::vector<bool>& polarity) {
  if (gate_arity(single_qubit_gate.kind()) != 1 ||
      !is_unitary_gate(single_qubit_gate.kind()))
    throw InvalidInstruction("multi_controlled expects a single-qubit unitary");
  if (controls.size() != polarity.size())
    throw InvalidInstruction("one polarity flag per control");

  Circuit core;
  core.add(single_qubit_gate);
  for (const auto& ctrl : controls) core = controlled(core, ctrl);

  std::vector<Instruction> out;
  for (std::size_t i = 0; i < controls.size(); ++i)
    if (!polarity[i]) out.push_back(gate(GateKind::X, controls[i].index));
  append(out, core.flatten());
  for (std::size_t i = 0; i < controls.size(); ++i)
    if (!polarity[i]) out.push_back(gate(GateKind::X, controls[i].index));
  return out;
}

}  // namespace qk::ir
