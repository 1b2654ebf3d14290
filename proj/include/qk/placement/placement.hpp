#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qk/ir/circuit.hpp"

namespace qk::placement {

class GraphTooSmall : public Error {
 public:
  using Error::Error;
};

class DisconnectedGraph : public Error {
 public:
  using Error::Error;
};

class DuplicatePhysicalIndex : public Error {
 public:
  using Error::Error;
};

class MapTooShort : public Error {
 public:
  using Error::Error;
};

class InvalidCouplingGraph : public Error {
 public:
  using Error::Error;
};

class UnknownCouplingGraph : public Error {
 public:
  using Error::Error;
};

class UnknownStrategy : public Error {
 public:
  using Error::Error;
};

// Undirected device connectivity. Edges are stored normalized (low index
// first) and deduplicated; self-loops are rejected at construction.
struct CouplingGraph {
  std::uint32_t n_physical = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  bool has_edge(std::uint32_t a, std::uint32_t b) const;
  std::vector<std::vector<std::uint32_t>> adjacency() const;
};

CouplingGraph make_graph(std::uint32_t n,
                         std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

// JSON form: {"n": 5, "edges": [[0,1],[1,2],[1,3],[3,4]]}
CouplingGraph parse_coupling_graph(const std::string& json_text);
CouplingGraph load_coupling_graph_file(const std::string& path);

// Stock 5-qubit device graphs plus a 27-qubit heavy-hex layout.
CouplingGraph builtin_graph(const std::string& name);
std::vector<std::string> builtin_graph_names();

enum class Strategy { ssp, sabre };
Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

struct PlacementResult {
  // Physical-index circuit; every two-qubit gate acts on a coupling edge.
  // Measure slots are carried over verbatim, so counts keys keep their
  // logical meaning even after routing moves the wires.
  ir::Circuit circuit;
  std::vector<std::uint32_t> initial_map;  // logical -> physical at entry
  std::vector<std::uint32_t> final_map;    // logical -> physical at exit
  std::uint32_t added_two_qubit_gates = 0;
};

// Routes the circuit onto the graph. Without an initial map, ssp starts from
// the identity layout and sabre picks one by a forward-backward-forward
// traversal. A supplied map must have distinct in-range entries covering
// every used qubit.
PlacementResult place(const ir::Circuit& c, const CouplingGraph& g, Strategy s,
                      std::optional<std::vector<std::uint32_t>> initial_map =
                          std::nullopt);

// Relabels logical index i to map[i] everywhere, keeping circuit structure.
ir::Circuit apply_qubit_map(const ir::Circuit& c,
                            const std::vector<std::uint32_t>& map);

// Verifier used by tests and the CLI: every two-qubit instruction sits on an
// edge of g and every index is < n_physical.
bool satisfies_graph(const ir::Circuit& c, const CouplingGraph& g);

}  // namespace qk::placement
