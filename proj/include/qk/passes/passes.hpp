#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qk/ir/circuit.hpp"
#include "qk/ir/stats.hpp"

namespace qk::passes {

class UnknownPass : public Error {
 public:
  using Error::Error;
};

class InvalidOptLevel : public Error {
 public:
  using Error::Error;
};

struct PassStats {
  std::string pass_name;
  double wall_time_ms = 0;
  ir::CircuitStats gates_before;
  ir::CircuitStats gates_after;
  // 1 - after/before by total gate count; 0 for an empty input.
  double reduction_fraction = 0;
};

// A pass maps a flattened gate list to an equivalent one. Contract for every
// registered pass: the result is unitarily equivalent up to global phase on
// the non-measurement part, and never longer than the input.
using PassFn =
    std::function<std::vector<ir::Instruction>(std::vector<ir::Instruction>)>;

void register_pass(const std::string& name, PassFn fn);
std::vector<std::string> available_passes();

// Runs one registered pass. The input tree is flattened first; optimization
// does not preserve nesting structure.
std::pair<ir::Circuit, PassStats> run_pass(const std::string& name,
                                           const ir::Circuit& c);

// Numbered pipelines: level 0 is empty, level 1 is rotation-folding,
// single-qubit-gate-merging, circuit-optimizer in that order.
const std::vector<std::string>& level_passes(int level);
std::pair<ir::Circuit, std::vector<PassStats>> run_level(int level,
                                                         const ir::Circuit& c);

std::string stats_to_json(const std::vector<PassStats>& stats);

// The stock transformations, exposed directly for tests. Each is also
// registered under the quoted name.
std::vector<ir::Instruction> circuit_optimizer(std::vector<ir::Instruction> in);
std::vector<ir::Instruction> rotation_folding(std::vector<ir::Instruction> in);
std::vector<ir::Instruction> single_qubit_gate_merging(
    std::vector<ir::Instruction> in);

}  // namespace qk::passes
