#include "qk/ir/circuit.hpp"

#include <algorithm>

namespace qk::ir {

Circuit::Circuit(std::string name, std::vector<Instruction> instructions)
    : name_(std::move(name)) {
  children_.reserve(instructions.size());
  for (auto& inst : instructions) children_.emplace_back(std::move(inst));
}

void Circuit::add(Instruction inst) { children_.emplace_back(std::move(inst)); }

void Circuit::add(Ptr sub) {
  if (!sub) throw Error("null sub-circuit");
  children_.emplace_back(std::move(sub));
}

void Circuit::add(Circuit sub) {
  children_.emplace_back(std::make_shared<const Circuit>(std::move(sub)));
}

void Circuit::add_all(const std::vector<Instruction>& instructions) {
  for (const auto& inst : instructions) children_.emplace_back(inst);
}

std::vector<Instruction> Circuit::flatten() const {
  std::vector<Instruction> out;
  std::vector<const Circuit*> path;
  flatten_into(out, path);
  return out;
}

void Circuit::flatten_into(std::vector<Instruction>& out,
                           std::vector<const Circuit*>& path) const {
  if (std::find(path.begin(), path.end(), this) != path.end())
    throw CircuitCycle("circuit '" + name_ + "' contains itself");
  path.push_back(this);
  for (const auto& node : children_) {
    if (const auto* inst = std::get_if<Instruction>(&node)) {
      out.push_back(*inst);
    } else {
      std::get<Ptr>(node)->flatten_into(out, path);
    }
  }
  path.pop_back();
}

std::uint32_t Circuit::min_width() const {
  std::uint32_t width = 0;
  for (const auto& inst : flatten())
    for (const auto& q : inst.qubits()) width = std::max(width, q.index + 1);
  return width;
}

}  // namespace qk::ir
