#include <cmath>
#include <complex>

#include "qk/ir/unitary.hpp"
#include "qk/passes/passes.hpp"

// The three stock passes. All of them work on the flattened gate list and
// share one adjacency notion: two instructions are adjacent on a qubit set
// when no instruction between them touches any qubit of that set.

namespace qk::passes {

namespace {

using ir::GateKind;
using ir::Instruction;

constexpr double kZeroAngleTol = 1e-12;
constexpr double kIdentityTol = 1e-10;

double mod_2pi(double a) {
  double r = std::fmod(a, 2 * M_PI);
  if (r > M_PI) r -= 2 * M_PI;
  if (r < -M_PI) r += 2 * M_PI;
  return r;
}

bool zero_angle(double a) { return std::abs(mod_2pi(a)) < kZeroAngleTol; }

// Rotations that vanish at angle 0 (mod 2pi). U3 counts when both the Ry
// angle and the combined phase angle vanish.
bool removable_rotation(const Instruction& inst) {
  switch (inst.kind()) {
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::Rz:
    case GateKind::U1:
    case GateKind::CPhase:
    case GateKind::CRz:
      return zero_angle(inst.params()[0]);
    case GateKind::U3:
      return zero_angle(inst.params()[0]) &&
             zero_angle(inst.params()[1] + inst.params()[2]);
    default:
      return false;
  }
}

bool same_qubit_set(const Instruction& a, const Instruction& b) {
  const auto& qa = a.qubits();
  const auto& qb = b.qubits();
  if (qa.size() != qb.size()) return false;
  if (qa == qb) return true;
  return qa.size() == 2 && qa[0] == qb[1] && qa[1] == qb[0];
}

bool inverse_pair(const Instruction& a, const Instruction& b) {
  switch (a.kind()) {
    // self-inverse, operand order significant
    case GateKind::H:
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::CX:
    case GateKind::CY:
    case GateKind::CH:
      return b.kind() == a.kind() && a.qubits() == b.qubits();
    // self-inverse and symmetric in the operands
    case GateKind::CZ:
    case GateKind::Swap:
      return b.kind() == a.kind() && same_qubit_set(a, b);
    case GateKind::S:
      return b.kind() == GateKind::Sdg && a.qubits() == b.qubits();
    case GateKind::Sdg:
      return b.kind() == GateKind::S && a.qubits() == b.qubits();
    case GateKind::T:
      return b.kind() == GateKind::Tdg && a.qubits() == b.qubits();
    case GateKind::Tdg:
      return b.kind() == GateKind::T && a.qubits() == b.qubits();
    default:
      return false;
  }
}

std::vector<Instruction> compact(const std::vector<Instruction>& v,
                                 const std::vector<bool>& dead) {
  std::vector<Instruction> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!dead[i]) out.push_back(v[i]);
  return out;
}

}  // namespace

std::vector<Instruction> circuit_optimizer(std::vector<Instruction> in) {
  bool changed = true;
  while (changed) {
    changed = false;

    std::vector<Instruction> kept;
    kept.reserve(in.size());
    for (auto& inst : in) {
      if (removable_rotation(inst))
        changed = true;
      else
        kept.push_back(std::move(inst));
    }
    in = std::move(kept);

    std::vector<bool> dead(in.size(), false);
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (dead[i]) continue;
      // The first live successor touching any of i's qubits decides: either
      // it cancels with i or it blocks i for good.
      for (std::size_t j = i + 1; j < in.size(); ++j) {
        if (dead[j]) continue;
        if (!in[i].shares_qubit_with(in[j])) continue;
        if (inverse_pair(in[i], in[j])) {
          dead[i] = dead[j] = true;
          changed = true;
        }
        break;
      }
    }
    if (changed) in = compact(in, dead);
  }
  return in;
}

namespace {

enum class Axis { none, x, y, z };

// Families eligible for angle merging. CPhase and CRz participate as
// z-axis rotations on their two-qubit support.
Axis rotation_axis(GateKind k) {
  switch (k) {
    case GateKind::Rx:
      return Axis::x;
    case GateKind::Ry:
      return Axis::y;
    case GateKind::Rz:
    case GateKind::U1:
    case GateKind::CPhase:
    case GateKind::CRz:
      return Axis::z;
    default:
      return Axis::none;
  }
}

// Diagonal in the computational basis on every operand.
bool fully_diagonal(GateKind k) {
  switch (k) {
    case GateKind::Z:
    case GateKind::S:
    case GateKind::Sdg:
    case GateKind::T:
    case GateKind::Tdg:
    case GateKind::Rz:
    case GateKind::U1:
    case GateKind::CZ:
    case GateKind::CPhase:
    case GateKind::CRz:
      return true;
    default:
      return false;
  }
}

bool is_controlled(GateKind k) {
  switch (k) {
    case GateKind::CX:
    case GateKind::CY:
    case GateKind::CZ:
    case GateKind::CH:
    case GateKind::CPhase:
    case GateKind::CRz:
      return true;
    default:
      return false;
  }
}

// Two rotations whose angles add into one instruction: same axis and same
// operator support. Rz and U1 mix freely (they differ by a global phase).
bool merge_partner(const Instruction& a, const Instruction& b) {
  const Axis axis = rotation_axis(a.kind());
  if (axis != rotation_axis(b.kind())) return false;
  switch (a.kind()) {
    case GateKind::Rx:
    case GateKind::Ry:
      return b.kind() == a.kind() && a.qubits() == b.qubits();
    case GateKind::Rz:
    case GateKind::U1:
      return (b.kind() == GateKind::Rz || b.kind() == GateKind::U1) &&
             a.qubits() == b.qubits();
    case GateKind::CPhase:
      return b.kind() == GateKind::CPhase && same_qubit_set(a, b);
    case GateKind::CRz:
      return b.kind() == GateKind::CRz && a.qubits() == b.qubits();
    default:
      return false;
  }
}

// Whether `inter`, which touches the rotation's support, commutes with it.
// z-axis rotations are diagonal, so anything diagonal on the shared qubits
// passes, including the control side of any controlled gate. x/y rotations
// only pass their own Pauli and the matching controlled target.
bool commutes_past(const Instruction& rot, Axis axis, const Instruction& inter) {
  if (axis == Axis::z) {
    if (fully_diagonal(inter.kind())) return true;
    if (is_controlled(inter.kind())) {
      for (const auto& q : rot.qubits())
        if (inter.touches(q) && !(q == inter.qubits()[0])) return false;
      return true;
    }
    return false;
  }
  const auto& q = rot.qubits()[0];
  if (axis == Axis::x) {
    if ((inter.kind() == GateKind::X || inter.kind() == GateKind::Rx) &&
        inter.qubits()[0] == q)
      return true;
    return inter.kind() == GateKind::CX && inter.qubits()[1] == q;
  }
  if ((inter.kind() == GateKind::Y || inter.kind() == GateKind::Ry) &&
      inter.qubits()[0] == q)
    return true;
  return inter.kind() == GateKind::CY && inter.qubits()[1] == q;
}

}  // namespace

std::vector<Instruction> rotation_folding(std::vector<Instruction> in) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<bool> dead(in.size(), false);

    for (std::size_t i = 0; i < in.size(); ++i) {
      if (dead[i]) continue;
      const Axis axis = rotation_axis(in[i].kind());
      if (axis == Axis::none) continue;
      for (std::size_t j = i + 1; j < in.size(); ++j) {
        if (dead[j]) continue;
        if (!in[i].shares_qubit_with(in[j])) continue;
        if (merge_partner(in[i], in[j])) {
          // The later instruction survives with the summed angle, so merged
          // rotations drift toward the end of the commuting window.
          in[j] = Instruction(in[j].kind(), in[j].qubits(),
                              {in[i].params()[0] + in[j].params()[0]});
          dead[i] = true;
          changed = true;
          break;
        }
        if (!commutes_past(in[i], axis, in[j])) break;
      }
    }

    for (std::size_t i = 0; i < in.size(); ++i) {
      if (dead[i]) continue;
      if (rotation_axis(in[i].kind()) != Axis::none && removable_rotation(in[i])) {
        dead[i] = true;
        changed = true;
      }
    }
    if (changed) in = compact(in, dead);
  }
  return in;
}

namespace {

// Euler re-synthesis of a single-qubit run product. Returns zero gates for
// an identity (up to global phase), one U1 for a diagonal, one U3 otherwise.
std::vector<Instruction> resynthesize(const Eigen::Matrix2cd& m,
                                      std::uint32_t q) {
  if (std::abs(m(0, 1)) < kIdentityTol && std::abs(m(1, 0)) < kIdentityTol) {
    const std::complex<double> ratio = m(1, 1) / m(0, 0);
    const double phase = std::arg(ratio);
    if (std::abs(ratio - 1.0) < kIdentityTol) return {};
    return {ir::rot(GateKind::U1, q, phase)};
  }
  const auto angles = ir::zyz_decompose(m);
  return {ir::u3(q, angles.gamma, angles.beta, angles.delta)};
}

}  // namespace

std::vector<Instruction> single_qubit_gate_merging(std::vector<Instruction> in) {
  // Per-qubit maximal runs of single-qubit unitaries, indices into `in`.
  std::map<std::uint32_t, std::vector<std::size_t>> open;
  std::vector<std::vector<std::size_t>> runs;
  auto close = [&](std::uint32_t q) {
    auto it = open.find(q);
    if (it == open.end()) return;
    if (it->second.size() >= 2) runs.push_back(std::move(it->second));
    open.erase(it);
  };
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto& inst = in[i];
    if (ir::gate_arity(inst.kind()) == 1 && ir::is_unitary_gate(inst.kind())) {
      open[inst.qubits()[0].index].push_back(i);
    } else {
      for (const auto& q : inst.qubits()) close(q.index);
    }
  }
  for (auto it = open.begin(); it != open.end();) {
    auto q = it->first;
    ++it;
    close(q);
  }

  if (runs.empty()) return in;

  // Replacement gates keyed by the run's first index; every other run index
  // is dropped. Gates between run members act on other qubits, so pulling
  // the product to the front of the run is exact.
  std::map<std::size_t, std::vector<Instruction>> replacement;
  std::vector<bool> dead(in.size(), false);
  for (const auto& run : runs) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    for (std::size_t idx : run)
      m = ir::gate_matrix_1q(in[idx].kind(), in[idx].params()) * m;
    for (std::size_t idx : run) dead[idx] = true;
    replacement[run.front()] = resynthesize(m, in[run.front()].qubits()[0].index);
  }

  std::vector<Instruction> out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (auto it = replacement.find(i); it != replacement.end())
      for (const auto& g : it->second) out.push_back(g);
    if (!dead[i]) out.push_back(in[i]);
  }
  return out;
}

}  // namespace qk::passes
