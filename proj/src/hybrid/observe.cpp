#include <algorithm>
#include <cmath>

#include "qk/hybrid/hybrid.hpp"

namespace qk::hybrid {

namespace {

std::string term_label(const PauliString& s) {
  std::string label;
  for (const auto& f : s) {
    label.push_back(f.axis);
    label += std::to_string(f.qubit);
  }
  return label;
}

void add_basis_change(ir::Circuit& c, const PauliFactor& f) {
  if (f.axis == 'X') {
    c.add(ir::gate(ir::GateKind::H, f.qubit));
  } else if (f.axis == 'Y') {
    c.add(ir::gate(ir::GateKind::Sdg, f.qubit));
    c.add(ir::gate(ir::GateKind::H, f.qubit));
  }
}

void add_basis_change_inverse(ir::Circuit& c, const PauliFactor& f) {
  if (f.axis == 'X') {
    c.add(ir::gate(ir::GateKind::H, f.qubit));
  } else if (f.axis == 'Y') {
    c.add(ir::gate(ir::GateKind::H, f.qubit));
    c.add(ir::gate(ir::GateKind::S, f.qubit));
  }
}

}  // namespace

Observation observe(const PauliOperator& op, const ir::Circuit& circuit) {
  for (const auto& inst : circuit.flatten())
    if (inst.kind() == ir::GateKind::Measure)
      throw AlreadyMeasured("observe requires an unmeasured circuit");

  Observation out;
  out.offset = 0;
  for (const auto& [s, c] : op.terms()) {
    if (s.empty()) {
      out.offset += c;
      continue;
    }
    ir::Circuit measured(circuit.name().empty()
                             ? term_label(s)
                             : circuit.name() + "_" + term_label(s));
    measured.add(circuit);
    for (const auto& f : s) add_basis_change(measured, f);
    for (const auto& f : s) measured.add(ir::measure(f.qubit));
    out.terms.push_back({c, s, std::move(measured)});
  }
  return out;
}

double expectation(const PauliOperator& op, const ir::Circuit& circuit,
                   backend::Backend& be, std::int64_t shots) {
  if (!op.is_hermitian())
    throw NonHermitianOperator("operator has a complex coefficient: " +
                               op.str());
  const Observation obs = observe(op, circuit);
  const std::uint32_t width =
      std::max({circuit.min_width(), op.num_qubits(), 1u});
  double acc = obs.offset.real();
  for (const auto& term : obs.terms) {
    auto buf = backend::qalloc(width);
    acc += term.coefficient.real() * be.exp_val(term.circuit, buf, shots);
  }
  return acc;
}

double expectation(const PauliOperator& op,
                   const frontend::KernelRegistry& registry,
                   const std::string& kernel, const frontend::KernelArgs& args,
                   backend::Backend& be, std::int64_t shots) {
  return expectation(op, frontend::instantiate(registry, kernel, args), be,
                     shots);
}

ir::Circuit exp_i_theta(double theta, const PauliOperator& op) {
  for (const auto& [s, c] : op.terms())
    if (std::abs(c.imag()) >= 1e-9)
      throw ComplexCoefficient("exp_i_theta needs real coefficients, got " +
                               op.str());

  ir::Circuit out("exp_i_theta");
  for (const auto& [s, c] : op.terms()) {
    if (s.empty()) continue;  // identity term = global phase
    for (const auto& f : s) add_basis_change(out, f);
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
      out.add(ir::gate(ir::GateKind::CX, s[i].qubit, s[i + 1].qubit));
    out.add(ir::rot(ir::GateKind::Rz, s.back().qubit, 2.0 * theta * c.real()));
    for (std::size_t i = s.size() - 1; i-- > 0;)
      out.add(ir::gate(ir::GateKind::CX, s[i].qubit, s[i + 1].qubit));
    for (auto it = s.rbegin(); it != s.rend(); ++it)
      add_basis_change_inverse(out, *it);
  }
  return out;
}

}  // namespace qk::hybrid
