#include "qk/ir/gate.hpp"

#include <array>
#include <unordered_map>

namespace qk::ir {

namespace {

struct GateInfo {
  GateKind kind;
  const char* name;
  int arity;
  int params;
};

constexpr std::array<GateInfo, 22> kGateTable{{
    {GateKind::H, "H", 1, 0},
    {GateKind::X, "X", 1, 0},
    {GateKind::Y, "Y", 1, 0},
    {GateKind::Z, "Z", 1, 0},
    {GateKind::S, "S", 1, 0},
    {GateKind::Sdg, "Sdg", 1, 0},
    {GateKind::T, "T", 1, 0},
    {GateKind::Tdg, "Tdg", 1, 0},
    {GateKind::Rx, "Rx", 1, 1},
    {GateKind::Ry, "Ry", 1, 1},
    {GateKind::Rz, "Rz", 1, 1},
    {GateKind::U1, "U1", 1, 1},
    {GateKind::U3, "U3", 1, 3},
    {GateKind::CX, "CX", 2, 0},
    {GateKind::CY, "CY", 2, 0},
    {GateKind::CZ, "CZ", 2, 0},
    {GateKind::CH, "CH", 2, 0},
    {GateKind::CPhase, "CPhase", 2, 1},
    {GateKind::CRz, "CRz", 2, 1},
    {GateKind::Swap, "Swap", 2, 0},
    {GateKind::Measure, "Measure", 1, 0},
    {GateKind::Reset, "Reset", 1, 0},
}};

constexpr bool table_order_matches_enum() {
  for (std::size_t i = 0; i < kGateTable.size(); ++i)
    if (kGateTable[i].kind != static_cast<GateKind>(i)) return false;
  return true;
}
static_assert(table_order_matches_enum());

const GateInfo& info(GateKind k) { return kGateTable[static_cast<std::size_t>(k)]; }

}  // namespace

int gate_arity(GateKind k) { return info(k).arity; }

int gate_param_count(GateKind k) { return info(k).params; }

const std::string& gate_name(GateKind k) {
  static const std::array<std::string, kGateTable.size()> names = [] {
    std::array<std::string, kGateTable.size()> out;
    for (const auto& g : kGateTable) out[static_cast<std::size_t>(g.kind)] = g.name;
    return out;
  }();
  return names[static_cast<std::size_t>(k)];
}

std::optional<GateKind> gate_from_name(const std::string& name) {
  static const std::unordered_map<std::string, GateKind> lookup = [] {
    std::unordered_map<std::string, GateKind> m;
    for (const auto& g : kGateTable) m.emplace(g.name, g.kind);
    m.emplace("CNOT", GateKind::CX);
    return m;
  }();
  auto it = lookup.find(name);
  if (it == lookup.end()) return std::nullopt;
  return it->second;
}

bool is_two_qubit(GateKind k) { return info(k).arity == 2; }

bool is_unitary_gate(GateKind k) {
  return k != GateKind::Measure && k != GateKind::Reset;
}

}  // namespace qk::ir
