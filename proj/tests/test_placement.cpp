#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "qk/backend/statevector.hpp"
#include "qk/ir/unitary.hpp"
#include "qk/placement/placement.hpp"
#include "support/oracles.hpp"

using namespace qk;
using namespace qk::placement;
using qk::ir::GateKind;
using qk::ir::Instruction;

namespace {

ir::Circuit circ(std::vector<Instruction> v) {
  ir::Circuit c("t");
  c.add_all(v);
  return c;
}

// Permutation unitary sending logical basis states onto physical wires:
// bit q of the input index lands on wire map[q].
Eigen::MatrixXcd perm_matrix(const std::vector<std::uint32_t>& map,
                             std::uint32_t n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    Eigen::Index y = 0;
    for (std::uint32_t q = 0; q < n; ++q)
      if ((x >> q) & 1) y |= Eigen::Index{1} << map[q];
    m(y, x) = 1;
  }
  return m;
}

// Routed circuits must implement P_final * U_logical * P_initial^dagger on
// the physical wires.
void check_routing_semantics(const ir::Circuit& logical,
                             const PlacementResult& r, std::uint32_t n_phys) {
  auto u_logical = ir::to_unitary(logical, n_phys);
  auto u_placed = ir::to_unitary(r.circuit, n_phys);
  std::vector<std::uint32_t> init(r.initial_map), fin(r.final_map);
  // Pad the permutations to the full physical width with unused wires held
  // in place (identity on the complement, consistently for init and final).
  std::vector<bool> used_i(n_phys, false), used_f(n_phys, false);
  for (auto p : init) used_i[p] = true;
  for (auto p : fin) used_f[p] = true;
  std::vector<std::uint32_t> free_i, free_f;
  for (std::uint32_t p = 0; p < n_phys; ++p) {
    if (!used_i[p]) free_i.push_back(p);
    if (!used_f[p]) free_f.push_back(p);
  }
  // Unmapped logical wires carry no amplitude in the comparison only if the
  // permutations agree there; map the k-th free initial wire to the k-th
  // free final wire so the padding cancels.
  for (std::size_t k = 0; k < free_i.size(); ++k) {
    init.push_back(free_i[k]);
    fin.push_back(free_f[k]);
  }
  auto pi = perm_matrix(init, n_phys);
  auto pf = perm_matrix(fin, n_phys);
  CHECK(ir::max_abs_diff(u_placed, pf * u_logical * pi.adjoint()) < 1e-9);
}

ir::Circuit ghz(std::uint32_t n, bool measured) {
  ir::Circuit c("ghz");
  c.add(ir::gate(GateKind::H, 0));
  for (std::uint32_t i = 0; i + 1 < n; ++i)
    c.add(ir::gate(GateKind::CX, i, i + 1));
  if (measured)
    for (std::uint32_t i = 0; i < n; ++i) c.add(ir::measure(i));
  return c;
}

}  // namespace

TEST_CASE("graph construction normalizes and validates edges") {
  auto g = make_graph(4, {{2, 1}, {0, 1}, {1, 2}, {3, 2}});
  CHECK(g.edges.size() == 3);
  CHECK(g.has_edge(1, 2));
  CHECK(g.has_edge(2, 1));
  CHECK(!g.has_edge(0, 3));
  CHECK_THROWS_AS(make_graph(3, {{1, 1}}), InvalidCouplingGraph);
  CHECK_THROWS_AS(make_graph(3, {{0, 3}}), InvalidCouplingGraph);
}

TEST_CASE("coupling graphs parse from JSON and from files") {
  auto g = parse_coupling_graph(
      R"({"n": 5, "edges": [[0,1],[1,2],[1,3],[3,4]]})");
  CHECK(g.n_physical == 5);
  CHECK(g.has_edge(1, 3));
  CHECK_THROWS_AS(parse_coupling_graph("not json"), InvalidCouplingGraph);
  CHECK_THROWS_AS(parse_coupling_graph(R"({"n": 2})"), InvalidCouplingGraph);
  CHECK_THROWS_AS(parse_coupling_graph(R"({"n": 2, "edges": [[0]]})"),
                  InvalidCouplingGraph);

  namespace fs = std::filesystem;
  auto path = fs::temp_directory_path() / "qk_graph_test.json";
  {
    std::ofstream f(path);
    f << R"({"n": 3, "edges": [[0,1],[1,2]]})";
  }
  auto loaded = load_coupling_graph_file(path.string());
  CHECK(loaded.n_physical == 3);
  fs::remove(path);
  CHECK_THROWS_AS(load_coupling_graph_file("/nonexistent/graph.json"),
                  InvalidCouplingGraph);
}

TEST_CASE("builtin graphs match the published device layouts") {
  auto vigo = builtin_graph("vigo");
  CHECK(vigo.n_physical == 5);
  using E = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
  CHECK(vigo.edges == E{{0, 1}, {1, 2}, {1, 3}, {3, 4}});
  CHECK(builtin_graph("ourense").edges == vigo.edges);

  auto yorktown = builtin_graph("yorktown");
  CHECK(yorktown.edges ==
        E{{0, 1}, {0, 2}, {1, 2}, {2, 3}, {2, 4}, {3, 4}});

  auto hh = builtin_graph("heavy-hex");
  CHECK(hh.n_physical == 27);
  CHECK(hh.edges.size() == 28);
  // connectivity sweep
  auto adj = hh.adjacency();
  std::vector<bool> seen(27, false);
  std::vector<std::uint32_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    for (auto nb : adj[cur])
      if (!seen[nb]) {
        seen[nb] = true;
        stack.push_back(nb);
      }
  }
  for (bool s : seen) CHECK(s);

  CHECK_THROWS_AS(builtin_graph("tokyo"), UnknownCouplingGraph);
  CHECK(builtin_graph_names().size() == 4);
}

TEST_CASE("apply_qubit_map relabels wires and keeps structure") {
  auto c = circ({ir::gate(GateKind::H, 0), ir::gate(GateKind::CX, 0, 1),
                 ir::measure(0), ir::measure(1)});
  auto mapped = apply_qubit_map(c, {5, 6});
  auto flat = mapped.flatten();
  REQUIRE(flat.size() == 4);
  CHECK(flat[0] == ir::gate(GateKind::H, 5));
  CHECK(flat[1] == ir::gate(GateKind::CX, 5, 6));
  CHECK(flat[2].qubits()[0].index == 5);
  // Classical slots travel with the logical qubit, not the physical wire.
  CHECK(flat[2].classical_target() == 0u);
  CHECK(flat[3].classical_target() == 1u);

  CHECK(apply_qubit_map(c, {0, 1}).flatten() == c.flatten());

  auto swapped = apply_qubit_map(circ({ir::gate(GateKind::CX, 0, 1)}), {1, 0});
  CHECK(swapped.flatten()[0] == ir::gate(GateKind::CX, 1, 0));

  CHECK_THROWS_AS(apply_qubit_map(c, {5}), MapTooShort);
  CHECK_THROWS_AS(apply_qubit_map(c, {5, 5}), DuplicatePhysicalIndex);

  // Nested structure survives.
  ir::Circuit parent("outer");
  parent.add(ir::gate(GateKind::H, 0));
  parent.add(circ({ir::gate(GateKind::X, 1)}));
  auto remapped = apply_qubit_map(parent, {3, 4});
  REQUIRE(remapped.children().size() == 2);
  CHECK(std::holds_alternative<ir::Circuit::Ptr>(remapped.children()[1]));
}

TEST_CASE("already-valid circuits pass through unchanged") {
  auto g = builtin_graph("vigo");
  auto c = circ({ir::gate(GateKind::H, 0), ir::gate(GateKind::CX, 0, 1),
                 ir::gate(GateKind::CX, 1, 2)});
  for (auto s : {Strategy::ssp, Strategy::sabre}) {
    auto r = place(c, g, s);
    CHECK(r.circuit.flatten() == c.flatten());
    CHECK(r.added_two_qubit_gates == 0);
    CHECK(r.initial_map == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(r.final_map == r.initial_map);
  }
}

TEST_CASE("routing a CX across a line inserts one swap with exact semantics") {
  auto line = make_graph(3, {{0, 1}, {1, 2}});
  auto c = circ({ir::gate(GateKind::CX, 0, 2)});

  auto r = place(c, line, Strategy::ssp);
  CHECK(satisfies_graph(r.circuit, line));
  CHECK(r.added_two_qubit_gates == 1);
  check_routing_semantics(c, r, 3);

  // sabre may instead pick an initial layout that needs no swap at all.
  auto rs = place(c, line, Strategy::sabre);
  CHECK(satisfies_graph(rs.circuit, line));
  check_routing_semantics(c, rs, 3);
}

TEST_CASE("GHZ-5 on vigo routes validly and preserves sampling statistics") {
  auto g = builtin_graph("vigo");
  auto logical = ghz(5, true);
  auto r = place(logical, g, Strategy::ssp);
  CHECK(satisfies_graph(r.circuit, g));
  CHECK(r.added_two_qubit_gates >= 1);

  backend::StatevectorBackend be(13);
  auto b1 = backend::qalloc(5);
  be.execute(logical, b1, 10000);
  be.set_seed(14);
  auto b2 = backend::qalloc(5);
  be.execute(r.circuit, b2, 10000);
  CHECK(oracles::tv_distance(b1.counts, b2.counts) < 0.05);
  for (const auto& [key, n] : b2.counts)
    CHECK((key == "00000" || key == "11111"));

  // Unitary check on the measure-free version.
  auto r2 = place(ghz(5, false), g, Strategy::ssp);
  check_routing_semantics(ghz(5, false), r2, 5);
}

TEST_CASE("explicit initial maps are honored and validated") {
  auto line = make_graph(3, {{0, 1}, {1, 2}});
  auto c = circ({ir::gate(GateKind::CX, 0, 1)});
  auto r = place(c, line, Strategy::ssp, std::vector<std::uint32_t>{2, 1});
  CHECK(r.initial_map == std::vector<std::uint32_t>{2, 1});
  CHECK(r.circuit.flatten()[0] == ir::gate(GateKind::CX, 2, 1));

  // Longer maps are allowed; the tail is ignored.
  auto r2 = place(c, line, Strategy::ssp, std::vector<std::uint32_t>{0, 1, 2});
  CHECK(r2.initial_map == std::vector<std::uint32_t>{0, 1});

  CHECK_THROWS_AS(place(c, line, Strategy::ssp, std::vector<std::uint32_t>{0}),
                  MapTooShort);
  CHECK_THROWS_AS(
      place(c, line, Strategy::ssp, std::vector<std::uint32_t>{1, 1}),
      DuplicatePhysicalIndex);
  CHECK_THROWS_AS(
      place(c, line, Strategy::ssp, std::vector<std::uint32_t>{0, 9}),
      GraphTooSmall);
}

TEST_CASE("placement errors cover capacity and connectivity") {
  auto line = make_graph(3, {{0, 1}, {1, 2}});
  CHECK_THROWS_AS(place(ghz(6, false), line, Strategy::ssp), GraphTooSmall);

  auto split = make_graph(4, {{0, 1}, {2, 3}});
  auto crossing = circ({ir::gate(GateKind::CX, 0, 2)});
  CHECK_THROWS_AS(place(crossing, split, Strategy::ssp), DisconnectedGraph);
  CHECK_THROWS_AS(place(crossing, split, Strategy::sabre), DisconnectedGraph);

  // Empty circuits place trivially.
  auto r = place(ir::Circuit("empty"), line, Strategy::sabre);
  CHECK(r.circuit.flatten().empty());
  CHECK(r.added_two_qubit_gates == 0);
}

TEST_CASE("random circuits route correctly under both strategies") {
  std::mt19937_64 rng(777);
  auto vigo = builtin_graph("vigo");
  for (int trial = 0; trial < 50; ++trial) {
    auto c = oracles::random_unitary_circuit(5, 25, rng);
    for (auto s : {Strategy::ssp, Strategy::sabre}) {
      auto r = place(c, vigo, s);
      CAPTURE(trial);
      CAPTURE(strategy_name(s));
      REQUIRE(satisfies_graph(r.circuit, vigo));
      check_routing_semantics(c, r, 5);

      // final_map stays a bijection
      auto sorted = r.final_map;
      std::sort(sorted.begin(), sorted.end());
      CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
  }
}

TEST_CASE("measured random circuits keep their outcome distribution") {
  std::mt19937_64 rng(778);
  auto yorktown = builtin_graph("yorktown");
  backend::StatevectorBackend be(31);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = oracles::random_unitary_circuit(5, 20, rng);
    for (std::uint32_t q = 0; q < 5; ++q) c.add(ir::measure(q));
    auto r = place(c, yorktown, trial % 2 ? Strategy::ssp : Strategy::sabre);
    REQUIRE(satisfies_graph(r.circuit, yorktown));

    be.set_seed(100 + static_cast<std::uint64_t>(trial));
    auto b1 = backend::qalloc(5);
    be.execute(c, b1, 10000);
    be.set_seed(200 + static_cast<std::uint64_t>(trial));
    auto b2 = backend::qalloc(5);
    be.execute(r.circuit, b2, 10000);
    CHECK(oracles::tv_distance(b1.counts, b2.counts) < 0.05);
  }
}

TEST_CASE("sabre does not trail ssp on heavy-hex routing volume") {
  std::mt19937_64 rng(5150);
  auto hh = builtin_graph("heavy-hex");
  double total_ssp = 0, total_sabre = 0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    auto c = oracles::random_unitary_circuit(10, 40, rng, 0.6);
    auto r_ssp = place(c, hh, Strategy::ssp);
    auto r_sabre = place(c, hh, Strategy::sabre);
    REQUIRE(satisfies_graph(r_ssp.circuit, hh));
    REQUIRE(satisfies_graph(r_sabre.circuit, hh));
    total_ssp += r_ssp.added_two_qubit_gates;
    total_sabre += r_sabre.added_two_qubit_gates;
  }
  MESSAGE("mean added swaps: ssp=" << total_ssp / trials
                                   << " sabre=" << total_sabre / trials);
  CHECK(total_sabre <= total_ssp);
}
