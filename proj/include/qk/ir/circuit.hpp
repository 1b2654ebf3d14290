#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qk/ir/instruction.hpp"

namespace qk::ir {

class CircuitCycle : public Error {
 public:
  using Error::Error;
};

// Tree-structured program: a named node whose children are either gate
// applications or nested circuits. Kernel composition appends the callee's
// tree as a child, so the shape mirrors the call graph.
class Circuit {
 public:
  using Ptr = std::shared_ptr<const Circuit>;
  using Node = std::variant<Instruction, Ptr>;

  Circuit() = default;
  explicit Circuit(std::string name) : name_(std::move(name)) {}
  Circuit(std::string name, std::vector<Instruction> instructions);

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  const std::vector<Node>& children() const { return children_; }
  bool empty() const { return children_.empty(); }

  void add(Instruction inst);
  void add(Ptr sub);
  void add(Circuit sub);
  void add_all(const std::vector<Instruction>& instructions);

  // Depth-first left-to-right expansion into a gate list. Sharing a subtree
  // is fine; a subtree reachable from itself is rejected.
  std::vector<Instruction> flatten() const;

  // Highest referenced qubit index + 1; 0 for an empty circuit.
  std::uint32_t min_width() const;

 private:
  void flatten_into(std::vector<Instruction>& out,
                    std::vector<const Circuit*>& path) const;

  std::string name_;
  std::vector<Node> children_;
};

}  // namespace qk::ir
