#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qk/placement/placement.hpp"

namespace qk::placement {

bool CouplingGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
}

std::vector<std::vector<std::uint32_t>> CouplingGraph::adjacency() const {
  std::vector<std::vector<std::uint32_t>> adj(n_physical);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

CouplingGraph make_graph(
    std::uint32_t n,
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
  for (auto& [a, b] : edges) {
    if (a == b)
      throw InvalidCouplingGraph("self-loop on qubit " + std::to_string(a));
    if (a >= n || b >= n)
      throw InvalidCouplingGraph("edge (" + std::to_string(a) + "," +
                                 std::to_string(b) + ") exceeds qubit count " +
                                 std::to_string(n));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return CouplingGraph{n, std::move(edges)};
}

CouplingGraph parse_coupling_graph(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidCouplingGraph(std::string("coupling graph JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("edges") ||
      !j["n"].is_number_unsigned() || !j["edges"].is_array())
    throw InvalidCouplingGraph(
        "coupling graph JSON must be {\"n\": int, \"edges\": [[i,j],...]}");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
        !e[1].is_number_unsigned())
      throw InvalidCouplingGraph("each edge must be a pair of qubit indices");
    edges.emplace_back(e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>());
  }
  return make_graph(j["n"].get<std::uint32_t>(), std::move(edges));
}

CouplingGraph load_coupling_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw InvalidCouplingGraph("cannot open coupling graph file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_coupling_graph(text.str());
}

namespace {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

// 27-qubit heavy-hexagon layout in the falcon arrangement.
EdgeList heavy_hex_edges() {
  return {{0, 1},   {1, 2},   {1, 4},   {2, 3},   {3, 5},   {4, 7},
          {5, 8},   {6, 7},   {7, 10},  {8, 9},   {8, 11},  {10, 12},
          {11, 14}, {12, 13}, {12, 15}, {13, 14}, {14, 16}, {15, 18},
          {16, 19}, {17, 18}, {18, 21}, {19, 20}, {19, 22}, {21, 23},
          {22, 25}, {23, 24}, {24, 25}, {25, 26}};
}

}  // namespace

CouplingGraph builtin_graph(const std::string& name) {
  if (name == "vigo" || name == "ourense")
    return make_graph(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}});
  if (name == "yorktown")
    return make_graph(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {2, 4}, {3, 4}});
  if (name == "heavy-hex") return make_graph(27, heavy_hex_edges());
  throw UnknownCouplingGraph("unknown coupling graph '" + name + "'");
}

std::vector<std::string> builtin_graph_names() {
  return {"vigo", "ourense", "yorktown", "heavy-hex"};
}

Strategy parse_strategy(const std::string& name) {
  if (name == "ssp" || name == "swap-shortest-path") return Strategy::ssp;
  if (name == "sabre") return Strategy::sabre;
  throw UnknownStrategy("unknown placement strategy '" + name + "'");
}

std::string strategy_name(Strategy s) {
  return s == Strategy::ssp ? "ssp" : "sabre";
}

namespace {

ir::Circuit remap_tree(const ir::Circuit& c,
                       const std::vector<std::uint32_t>& map) {
  ir::Circuit out(c.name());
  for (const auto& child : c.children()) {
    if (const auto* inst = std::get_if<ir::Instruction>(&child)) {
      std::vector<ir::QubitRef> qubits;
      for (const auto& q : inst->qubits()) qubits.push_back({map[q.index]});
      out.add(ir::Instruction(inst->kind(), std::move(qubits), inst->params(),
                              inst->classical_target()));
    } else {
      out.add(remap_tree(**std::get_if<ir::Circuit::Ptr>(&child), map));
    }
  }
  return out;
}

}  // namespace

ir::Circuit apply_qubit_map(const ir::Circuit& c,
                            const std::vector<std::uint32_t>& map) {
  const std::uint32_t used = c.min_width();
  if (map.size() < used)
    throw MapTooShort("qubit map has " + std::to_string(map.size()) +
                      " entries but the circuit uses " + std::to_string(used) +
                      " qubits");
  std::vector<std::uint32_t> sorted(map);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DuplicatePhysicalIndex("qubit map entries must be distinct");
  return remap_tree(c, map);
}

bool satisfies_graph(const ir::Circuit& c, const CouplingGraph& g) {
  for (const auto& inst : c.flatten()) {
    for (const auto& q : inst.qubits())
      if (q.index >= g.n_physical) return false;
    if (inst.qubits().size() == 2 &&
        !g.has_edge(inst.qubits()[0].index, inst.qubits()[1].index))
      return false;
  }
  return true;
}

}  // namespace qk::placement
