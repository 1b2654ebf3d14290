#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qk/ir/printing.hpp"
#include "qk/ir/stats.hpp"
#include "qk/ir/transforms.hpp"
#include "qk/ir/unitary.hpp"
#include "support/oracles.hpp"

using namespace qk::ir;
using oracles::product_unitary;
using Cd = std::complex<double>;

namespace {

Circuit bell_circuit() {
  Circuit bell("bell");
  bell.add(gate(GateKind::H, 0));
  bell.add(gate(GateKind::CX, 0, 1));
  return bell;
}

}  // namespace

TEST_CASE("gate table arity and parameter counts") {
  struct Row {
    GateKind k;
    int arity;
    int params;
  };
  const Row rows[] = {
      {GateKind::H, 1, 0},      {GateKind::X, 1, 0},   {GateKind::Y, 1, 0},
      {GateKind::Z, 1, 0},      {GateKind::S, 1, 0},   {GateKind::Sdg, 1, 0},
      {GateKind::T, 1, 0},      {GateKind::Tdg, 1, 0}, {GateKind::Rx, 1, 1},
      {GateKind::Ry, 1, 1},     {GateKind::Rz, 1, 1},  {GateKind::U1, 1, 1},
      {GateKind::U3, 1, 3},     {GateKind::CX, 2, 0},  {GateKind::CY, 2, 0},
      {GateKind::CZ, 2, 0},     {GateKind::CH, 2, 0},  {GateKind::CPhase, 2, 1},
      {GateKind::CRz, 2, 1},    {GateKind::Swap, 2, 0}, {GateKind::Measure, 1, 0},
      {GateKind::Reset, 1, 0},
  };
  for (const auto& r : rows) {
    CAPTURE(gate_name(r.k));
    CHECK(gate_arity(r.k) == r.arity);
    CHECK(gate_param_count(r.k) == r.params);
  }
  CHECK(gate_from_name("CNOT") == GateKind::CX);
  CHECK(gate_from_name("CX") == GateKind::CX);
  CHECK(!gate_from_name("bogus").has_value());
}

TEST_CASE("instruction construction validates operands") {
  CHECK_THROWS_AS(Instruction(GateKind::CX, {{0}}), InvalidInstruction);
  CHECK_THROWS_AS(Instruction(GateKind::H, {{0}, {1}}), InvalidInstruction);
  CHECK_THROWS_AS(Instruction(GateKind::CX, {{2}, {2}}), InvalidInstruction);
  CHECK_THROWS_AS(Instruction(GateKind::Rz, {{0}}), InvalidInstruction);
  CHECK_THROWS_AS(Instruction(GateKind::H, {{0}}, {0.5}), InvalidInstruction);
  CHECK_THROWS_AS(Instruction(GateKind::H, {{0}}, {}, 3), InvalidInstruction);
}

TEST_CASE("flatten walks the tree depth-first") {
  Circuit main("main");
  main.add(bell_circuit());
  main.add(measure(0));
  main.add(measure(1));

  auto flat = main.flatten();
  REQUIRE(flat.size() == 4);
  CHECK(flat[0] == gate(GateKind::H, 0));
  CHECK(flat[1] == gate(GateKind::CX, 0, 1));
  CHECK(flat[2] == measure(0));
  CHECK(flat[3] == measure(1));

  // Flattening the rebuilt flat circuit is a fixed point.
  Circuit rebuilt("rebuilt", flat);
  CHECK(rebuilt.flatten() == flat);
}

TEST_CASE("flatten rejects a self-referential tree") {
  auto c = std::make_shared<Circuit>("loop");
  c->add(gate(GateKind::H, 0));
  c->add(std::shared_ptr<const Circuit>(c));
  CHECK_THROWS_AS(c->flatten(), CircuitCycle);
}

TEST_CASE("single gate unitaries") {
  auto x = to_unitary(Circuit("x", {gate(GateKind::X, 0)}), 1);
  CHECK(std::abs(x(0, 1) - Cd{1, 0}) < 1e-15);
  CHECK(std::abs(x(1, 0) - Cd{1, 0}) < 1e-15);
  CHECK(std::abs(x(0, 0)) < 1e-15);
  CHECK(std::abs(x(1, 1)) < 1e-15);

  auto bell = to_unitary(bell_circuit(), 2);
  // First column is the Bell state (|00> + |11>)/sqrt(2).
  const double s = 1 / std::sqrt(2.0);
  CHECK(std::abs(bell(0, 0) - Cd{s, 0}) < 1e-12);
  CHECK(std::abs(bell(3, 0) - Cd{s, 0}) < 1e-12);
  CHECK(std::abs(bell(1, 0)) < 1e-12);
  CHECK(std::abs(bell(2, 0)) < 1e-12);
}

TEST_CASE("to_unitary matches the tensor-embedding oracle") {
  std::mt19937_64 rng(7101);
  for (int trial = 0; trial < 60; ++trial) {
    const std::uint32_t n = 1 + trial % 4;
    auto c = oracles::random_unitary_circuit(n, 12, rng);
    auto u = to_unitary(c, n);
    auto ref = product_unitary(c.flatten(), n);
    CHECK(max_abs_diff(u, ref) < 1e-12);
    CHECK(is_unitary(u, 1e-10));
  }
}

TEST_CASE("to_unitary rejects non-unitary and out-of-range input") {
  Circuit c("m", {measure(0)});
  CHECK_THROWS_AS(to_unitary(c, 1), NonUnitaryCircuit);
  Circuit wide("w", {gate(GateKind::X, 3)});
  CHECK_THROWS_AS(to_unitary(wide, 2), QubitOutOfRange);
}

TEST_CASE("adjoint inverts gate kinds") {
  CHECK(adjoint_instruction(gate(GateKind::S, 0)) == gate(GateKind::Sdg, 0));
  CHECK(adjoint_instruction(gate(GateKind::Sdg, 0)) == gate(GateKind::S, 0));
  CHECK(adjoint_instruction(gate(GateKind::T, 2)) == gate(GateKind::Tdg, 2));
  CHECK(adjoint_instruction(gate(GateKind::H, 1)) == gate(GateKind::H, 1));
  CHECK(adjoint_instruction(rot(GateKind::Rz, 0, 0.3)) == rot(GateKind::Rz, 0, -0.3));
  CHECK(adjoint_instruction(u3(0, 0.1, 0.2, 0.3)) == u3(0, -0.1, -0.3, -0.2));
  CHECK_THROWS_AS(adjoint_instruction(measure(0)), AdjointOfNonUnitary);
  CHECK_THROWS_AS(adjoint(Circuit("r", {reset(0)})), AdjointOfNonUnitary);
}

TEST_CASE("adjoint circuit multiplies to the identity") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint32_t n = 1 + trial % 3;
    auto c = oracles::random_unitary_circuit(n, 10, rng);
    auto u = to_unitary(c, n);
    auto udg = to_unitary(adjoint(c), n);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    CHECK(max_abs_diff(udg * u, id) < 1e-12);
    CHECK(max_abs_diff(u.adjoint(), udg) < 1e-12);
  }
}

TEST_CASE("controlled T is a CPhase(pi/4)") {
  Circuit t("t", {gate(GateKind::T, 1)});
  auto ct = controlled(t, {0});
  auto u = to_unitary(ct, 2);
  Eigen::Matrix4cd expected = Eigen::Matrix4cd::Identity();
  expected(3, 3) = std::exp(Cd{0, M_PI / 4});
  CHECK(max_abs_diff(u, expected) < 1e-12);
}

TEST_CASE("controlled expansion of every unitary kind is phase-exact") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int k = 0; k < 22; ++k) {
    const GateKind kind = static_cast<GateKind>(k);
    if (!is_unitary_gate(kind)) continue;
    CAPTURE(gate_name(kind));
    std::vector<double> params;
    for (int p = 0; p < gate_param_count(kind); ++p) params.push_back(angle(rng));
    const std::uint32_t n = gate_arity(kind);  // payload width
    Instruction inst = gate_arity(kind) == 1 ? Instruction{kind, {{0}}, params}
                                             : Instruction{kind, {{0}, {1}}, params};
    // Control is the highest qubit, so block-diag(I, U) in the little-endian
    // basis: top-left block identity, bottom-right the payload unitary.
    auto expanded = controlled_instruction(inst, {n});
    auto u = to_unitary(expanded, n + 1);
    auto payload = product_unitary({inst}, n);
    const Eigen::Index half = payload.rows();
    CHECK(max_abs_diff(u.topLeftCorner(half, half),
                       Eigen::MatrixXcd::Identity(half, half)) < 1e-12);
    CHECK(max_abs_diff(u.bottomRightCorner(half, half), payload) < 1e-12);
    CHECK(u.topRightCorner(half, half).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(u.bottomLeftCorner(half, half).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("controlled circuit embedding on random payloads") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    auto c = oracles::random_unitary_circuit(2, 8, rng);
    auto u = to_unitary(controlled(c, {2}), 3);
    auto payload = to_unitary(c, 2);
    CHECK(max_abs_diff(u.topLeftCorner(4, 4), Eigen::MatrixXcd::Identity(4, 4)) <
          1e-9);
    CHECK(max_abs_diff(u.bottomRightCorner(4, 4), payload) < 1e-9);
  }
}

TEST_CASE("controlled of controlled reaches a Toffoli") {
  Circuit x("x", {gate(GateKind::X, 0)});
  auto ccx = controlled(controlled(x, {1}), {2});
  auto u = to_unitary(ccx, 3);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Identity(8, 8);
  // Flip qubit 0 when qubits 1 and 2 are set: indices 6 and 7 swap.
  expected(6, 6) = expected(7, 7) = 0;
  expected(6, 7) = expected(7, 6) = 1;
  CHECK(max_abs_diff(u, expected) < 1e-12);
}

TEST_CASE("controlled rejects overlap and non-unitary gates") {
  Circuit c("c", {gate(GateKind::CX, 0, 1)});
  CHECK_THROWS_AS(controlled(c, {1}), InvalidInstruction);
  Circuit m("m", {measure(0)});
  CHECK_THROWS_AS(controlled(m, {1}), ControlOfNonUnitary);
}

TEST_CASE("multi_controlled honours control polarity") {
  // X on qubit 0 gated on q1 == 1, q2 == 0: swaps indices 2 and 3 only.
  auto insts = multi_controlled(gate(GateKind::X, 0), {{1}, {2}}, {true, false});
  auto u = to_unitary(insts, 3);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Identity(8, 8);
  expected(2, 2) = expected(3, 3) = 0;
  expected(2, 3) = expected(3, 2) = 1;
  CHECK(max_abs_diff(u, expected) < 1e-12);
}

TEST_CASE("zyz decomposition reconstructs Haar samples") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Matrix2cd u = oracles::haar_unitary(2, rng);
    auto e = zyz_decompose(u);
    Eigen::Matrix2cd rebuilt =
        std::exp(Cd{0, e.alpha}) *
        (gate_matrix_1q(GateKind::Rz, {e.beta}) *
         gate_matrix_1q(GateKind::Ry, {e.gamma}) *
         gate_matrix_1q(GateKind::Rz, {e.delta}));
    CHECK((u - rebuilt).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("stats of the bell circuit with measures") {
  Circuit main("main");
  main.add(bell_circuit());
  main.add(measure(0));
  main.add(measure(1));
  auto s = stats(main);
  CHECK(s.total_gates == 4);
  CHECK(s.two_qubit_count == 1);
  CHECK(s.depth == 3);
  CHECK(s.histogram.at(GateKind::H) == 1);
  CHECK(s.histogram.at(GateKind::CX) == 1);
  CHECK(s.histogram.at(GateKind::Measure) == 2);
}

TEST_CASE("depth counts parallel gates once") {
  Circuit c("par");
  c.add(gate(GateKind::H, 0));
  c.add(gate(GateKind::H, 1));
  c.add(gate(GateKind::H, 2));
  CHECK(stats(c).depth == 1);
  c.add(gate(GateKind::CX, 0, 2));
  CHECK(stats(c).depth == 2);
}

TEST_CASE("printer emits one stable line per instruction") {
  Circuit main("main");
  main.add(bell_circuit());
  main.add(measure(0));
  main.add(measure(1));
  CHECK(print_circuit(main) == "H q0\nCX q0,q1\nMeasure q0\nMeasure q1\n");

  CHECK(format_instruction(rot(GateKind::Rz, 0, 0.5)) == "Rz(0.5) q0");
  CHECK(format_instruction(u3(1, 0.1, 0.2, 0.3)) == "U3(0.1,0.2,0.3) q1");
  CHECK(format_instruction(rot2(GateKind::CPhase, 2, 0, 0.25)) ==
        "CPhase(0.25) q2,q0");
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3, M_PI, -2.5e-17, 1e300, 0.0}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("min_width spans the highest index") {
  Circuit c("w", {gate(GateKind::CX, 0, 4)});
  CHECK(c.min_width() == 5);
  CHECK(Circuit("e").min_width() == 0);
}
