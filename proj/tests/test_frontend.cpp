#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>

#include "qk/backend/statevector.hpp"
#include "qk/frontend/decompose.hpp"
#include "qk/frontend/instantiate.hpp"
#include "qk/frontend/lexer.hpp"
#include "qk/frontend/parser.hpp"
#include "qk/frontend/registry.hpp"
#include "qk/ir/printing.hpp"
#include "qk/ir/transforms.hpp"
#include "qk/ir/unitary.hpp"
#include "support/oracles.hpp"

using namespace qk;
using namespace qk::frontend;
using qk::ir::GateKind;

namespace {

ir::Circuit build(const std::string& source, const std::string& kernel,
                  const KernelArgs& args) {
  KernelRegistry reg;
  reg.jit_compile(source);
  return instantiate(reg, kernel, args);
}

// DFT matrix with omega = exp(2*pi*i/N), the little-endian QFT target.
Eigen::MatrixXcd dft_matrix(int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd f(dim, dim);
  const std::complex<double> w =
      std::exp(std::complex<double>(0, 2 * M_PI / static_cast<double>(dim)));
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index k = 0; k < dim; ++k)
      f(j, k) = std::pow(w, static_cast<double>(j * k)) /
                std::sqrt(static_cast<double>(dim));
  return f;
}

const char* kBellXasm = R"(
__qpu__ void bell(qreg q) {
  H(q[0]);
  CX(q[0], q[1]);
  Measure(q[0]);
  Measure(q[1]);
}
)";

}  // namespace

TEST_CASE("lexer reports positions and strips comments") {
  auto toks = tokenize("H(q[0]); // gate\n/* block */ X(q[1]);");
  REQUIRE(toks.size() > 5);
  CHECK(toks[0].is_ident("H"));
  CHECK(toks[0].pos.line == 1);
  CHECK(toks[0].pos.col == 1);
  bool saw_x = false;
  for (const auto& t : toks)
    if (t.is_ident("X")) {
      saw_x = true;
      CHECK(t.pos.line == 2);
    }
  CHECK(saw_x);

  CHECK_THROWS_AS(tokenize("H(q[0]); \x01"), SyntaxError);
  try {
    tokenize("ok\n  \x01");
  } catch (const SyntaxError& e) {
    CHECK(e.pos().line == 2);
    CHECK(e.pos().col == 3);
  }
}

TEST_CASE("bell kernel instantiates to the canonical gate list") {
  auto c = build(kBellXasm, "bell", {QregArg{"q", 2}});
  auto flat = c.flatten();
  REQUIRE(flat.size() == 4);
  CHECK(flat[0] == ir::gate(GateKind::H, 0));
  CHECK(flat[1] == ir::gate(GateKind::CX, 0, 1));
  CHECK(flat[2] == ir::measure(0));
  CHECK(flat[3] == ir::measure(1));
}

TEST_CASE("signature parsing covers every parameter type") {
  const char* src = R"(
__qpu__ void sig(qreg q, double x, int n, std::vector<double> v,
                 std::vector<int> m, vector<double> w) {
  Rx(q[0], x);
  Ry(q[0], v[0]);
  Rz(q[0], w[n]);
  Rx(q[0], m[0]);
}
)";
  auto defs = parse_kernels(src);
  REQUIRE(defs.size() == 1);
  const auto& p = defs[0].signature.params;
  REQUIRE(p.size() == 6);
  CHECK(p[0].type == ParamType::qreg);
  CHECK(p[1].type == ParamType::real);
  CHECK(p[2].type == ParamType::integer);
  CHECK(p[3].type == ParamType::real_vector);
  CHECK(p[4].type == ParamType::int_vector);
  CHECK(p[5].type == ParamType::real_vector);

  KernelRegistry reg;
  reg.add(defs[0]);
  auto c = instantiate(reg, "sig",
                       {QregArg{"q", 1}, 0.5, 1ll, std::vector<double>{0.25},
                        std::vector<long long>{3}, std::vector<double>{0.1, 0.9}});
  auto flat = c.flatten();
  REQUIRE(flat.size() == 4);
  CHECK(flat[0].params()[0] == doctest::Approx(0.5));
  CHECK(flat[1].params()[0] == doctest::Approx(0.25));
  CHECK(flat[2].params()[0] == doctest::Approx(0.9));
  CHECK(flat[3].params()[0] == doctest::Approx(3.0));
}

TEST_CASE("loops, size(), and let bindings drive a GHZ builder") {
  const char* src = R"(
__qpu__ void ghz(qreg q) {
  const auto n = q.size();
  H(q[0]);
  for (int i = 0; i < n - 1; i++) {
    CX(q[i], q[i + 1]);
  }
}
)";
  auto c = build(src, "ghz", {QregArg{"q", 4}});
  auto flat = c.flatten();
  REQUIRE(flat.size() == 4);
  CHECK(flat[0] == ir::gate(GateKind::H, 0));
  CHECK(flat[1] == ir::gate(GateKind::CX, 0, 1));
  CHECK(flat[2] == ir::gate(GateKind::CX, 1, 2));
  CHECK(flat[3] == ir::gate(GateKind::CX, 2, 3));
}

TEST_CASE("counting loops may run downward") {
  const char* src = R"(
__qpu__ void countdown(qreg q) {
  for (int i = 2; i >= 0; i--) {
    X(q[i]);
  }
}
)";
  auto flat = build(src, "countdown", {QregArg{"q", 3}}).flatten();
  REQUIRE(flat.size() == 3);
  CHECK(flat[0].qubits()[0].index == 2);
  CHECK(flat[2].qubits()[0].index == 0);
}

TEST_CASE("empty for range leaves the parent unchanged") {
  const char* src = R"(
__qpu__ void nothing(qreg q) {
  for (int i = 0; i < 0; i++) {
    X(q[i]);
  }
}
)";
  KernelRegistry reg;
  reg.jit_compile(src);
  ir::Circuit parent("main");
  parent.add(ir::gate(GateKind::H, 0));
  instantiate(reg, "nothing", {QregArg{"q", 1}}, parent);
  auto flat = parent.flatten();
  REQUIRE(flat.size() == 1);
  CHECK(flat[0] == ir::gate(GateKind::H, 0));
}

TEST_CASE("if/else selects on classical arguments") {
  const char* src = R"(
__qpu__ void pick(qreg q, int which) {
  if (which == 1) {
    X(q[0]);
  } else {
    Z(q[0]);
  }
  if (which > 0 && which < 3) H(q[0]);
}
)";
  auto flat1 = build(src, "pick", {QregArg{"q", 1}, 1ll}).flatten();
  REQUIRE(flat1.size() == 2);
  CHECK(flat1[0].kind() == GateKind::X);
  CHECK(flat1[1].kind() == GateKind::H);
  auto flat5 = build(src, "pick", {QregArg{"q", 1}, 5ll}).flatten();
  REQUIRE(flat5.size() == 1);
  CHECK(flat5[0].kind() == GateKind::Z);
}

TEST_CASE("adjoint kernel call inverts the callee") {
  const char* src = R"(
__qpu__ void su(qreg q) {
  T(q[0]);
  Ry(q[0], 0.3);
  S(q[0]);
}
__qpu__ void su_dag(qreg q) {
  su::adjoint(q);
}
)";
  KernelRegistry reg;
  reg.jit_compile(src);
  auto fwd = ir::to_unitary(instantiate(reg, "su", {QregArg{"q", 1}}), 1);
  auto bwd = ir::to_unitary(instantiate(reg, "su_dag", {QregArg{"q", 1}}), 1);
  CHECK(ir::max_abs_diff(bwd, fwd.adjoint()) < 1e-12);
}

TEST_CASE("ctrl kernel call matches the controlled transform") {
  const char* src = R"(
__qpu__ void payload(qreg q) {
  Ry(q[1], 0.4);
  T(q[1]);
}
__qpu__ void by_qubit(qreg q) {
  payload::ctrl(q[0], q);
}
__qpu__ void by_index(qreg q) {
  payload::ctrl(0, q);
}
)";
  KernelRegistry reg;
  reg.jit_compile(src);
  auto sub = instantiate(reg, "payload", {QregArg{"q", 2}});
  auto expected = ir::to_unitary(ir::controlled(sub, ir::QubitRef{0}), 2);
  auto u1 = ir::to_unitary(instantiate(reg, "by_qubit", {QregArg{"q", 2}}), 2);
  auto u2 = ir::to_unitary(instantiate(reg, "by_index", {QregArg{"q", 2}}), 2);
  CHECK(ir::max_abs_diff(u1, expected) < 1e-12);
  CHECK(ir::max_abs_diff(u2, expected) < 1e-12);
}

TEST_CASE("composition transparency: parent append equals fresh instantiation") {
  KernelRegistry reg;
  reg.jit_compile(kBellXasm);
  ir::Circuit parent("driver");
  instantiate(reg, "bell", {QregArg{"q", 2}}, parent);
  auto fresh = instantiate(reg, "bell", {QregArg{"q", 2}});
  CHECK(parent.flatten() == fresh.flatten());
}

TEST_CASE("qft stdlib: single qubit is H, matrix matches the DFT oracle") {
  KernelRegistry reg;
  auto u1 = ir::to_unitary(
      instantiate(reg, "qft", {QregArg{"q", 1}, 0ll, 1ll, 1ll}), 1);
  CHECK(ir::max_abs_diff(u1, ir::gate_matrix_1q(GateKind::H, {})) < 1e-12);

  for (int n = 2; n <= 3; ++n) {
    auto u = ir::to_unitary(
        instantiate(reg, "qft", {QregArg{"q", static_cast<std::uint32_t>(n)},
                                 0ll, static_cast<long long>(n), 1ll}),
        static_cast<std::uint32_t>(n));
    CHECK(ir::max_abs_diff(u, dft_matrix(n)) < 1e-9);
  }
}

TEST_CASE("iqft is the adjoint of qft and their concatenation is identity") {
  KernelRegistry reg;
  KernelArgs args{QregArg{"q", 3}, 0ll, 3ll, 1ll};
  auto fwd = instantiate(reg, "qft", args);
  auto inv = instantiate(reg, "iqft", args);
  ir::Circuit both("both");
  both.add(fwd);
  both.add(inv);
  auto u = ir::to_unitary(both, 3);
  CHECK(ir::max_abs_diff(u, Eigen::MatrixXcd::Identity(8, 8)) < 1e-9);

  auto expected = ir::to_unitary(ir::adjoint(fwd), 3);
  CHECK(ir::max_abs_diff(ir::to_unitary(inv, 3), expected) < 1e-12);
}

TEST_CASE("qft on a sub-register shifts the standalone network") {
  KernelRegistry reg;
  auto shifted =
      instantiate(reg, "qft", {QregArg{"q", 3}, 1ll, 2ll, 1ll}).flatten();
  auto base = instantiate(reg, "qft", {QregArg{"q", 2}, 0ll, 2ll, 1ll}).flatten();
  REQUIRE(shifted.size() == base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(shifted[i].kind() == base[i].kind());
    REQUIRE(shifted[i].qubits().size() == base[i].qubits().size());
    for (std::size_t j = 0; j < base[i].qubits().size(); ++j)
      CHECK(shifted[i].qubits()[j].index == base[i].qubits()[j].index + 1);
  }
}

TEST_CASE("stdlib range violations raise RangeError") {
  KernelRegistry reg;
  CHECK_THROWS_AS(instantiate(reg, "qft", {QregArg{"q", 4}, 2ll, 3ll, 0ll}),
                  RangeError);
}

TEST_CASE("QPE picks out the T-gate phase exactly") {
  const char* src = R"(
__qpu__ void compositeOracle(qreg q) {
  const auto nQubits = q.size();
  T(q[nQubits - 1]);
}

__qpu__ void qpe(qreg q) {
  const auto nQubits = q.size();
  const auto nCounting = nQubits - 1;
  X(q[nQubits - 1]);
  for (int i = 0; i < nCounting; i++) {
    H(q[i]);
  }
  for (int i = 0; i < nCounting; i++) {
    const int nbCalls = 1 << i;
    for (int j = 0; j < nbCalls; j++) {
      compositeOracle::ctrl(i, q);
    }
  }
  iqft(q, 0, nCounting, 1);
  for (int i = 0; i < nCounting; i++) {
    Measure(q[i]);
  }
}
)";
  KernelRegistry reg;
  reg.jit_compile(src);
  auto c = instantiate(reg, "qpe", {QregArg{"q", 4}});

  bool has_iqft = false, has_ctrl = false;
  std::function<void(const ir::Circuit&)> scan = [&](const ir::Circuit& node) {
    if (node.name() == "iqft") has_iqft = true;
    if (node.name().find("_ctrl") != std::string::npos) has_ctrl = true;
    for (const auto& ch : node.children())
      if (const auto* sub = std::get_if<ir::Circuit::Ptr>(&ch)) scan(**sub);
  };
  scan(c);
  CHECK(has_iqft);
  CHECK(has_ctrl);

  backend::StatevectorBackend be(11);
  auto buf = backend::qalloc(4);
  be.execute(c, buf, 256);
  REQUIRE(buf.counts.size() == 1);
  CHECK(buf.counts.count("100") == 1);
  CHECK(buf.counts.at("100") == 256);
}

TEST_CASE("decompose block reproduces the Toffoli truth table") {
  const char* src = R"(
__qpu__ void ccnot(qreg q, std::vector<int> bit_config) {
  for (int i = 0; i < bit_config.size(); i++) {
    if (bit_config[i]) {
      X(q[i]);
    }
  }
  decompose {
    UnitaryMatrix ccnot_mat = UnitaryMatrix::Identity(8, 8);
    ccnot_mat(6, 6) = 0.0;
    ccnot_mat(7, 7) = 0.0;
    ccnot_mat(6, 7) = 1.0;
    ccnot_mat(7, 6) = 1.0;
  } (q);
  for (int i = 0; i < q.size(); i++) {
    Measure(q[i]);
  }
}
)";
  KernelRegistry reg;
  reg.jit_compile(src);
  backend::StatevectorBackend be(3);

  auto run = [&](std::vector<long long> bits) {
    auto c = instantiate(reg, "ccnot", {QregArg{"q", 3}, bits});
    auto buf = backend::qalloc(3);
    be.execute(c, buf, 64);
    REQUIRE(buf.counts.size() == 1);
    return buf.counts.begin()->first;
  };
  CHECK(run({1, 1, 0}) == "111");
  CHECK(run({1, 1, 1}) == "110");
  CHECK(run({0, 1, 0}) == "010");
  CHECK(run({1, 0, 1}) == "101");
  CHECK(run({0, 0, 0}) == "000");
}

TEST_CASE("decompose block without state prep equals a Toffoli unitary") {
  const char* src = R"(
__qpu__ void raw(qreg q) {
  decompose {
    UnitaryMatrix m = UnitaryMatrix::Identity(8, 8);
    m(6, 6) = 0.0;
    m(7, 7) = 0.0;
    m(6, 7) = 1.0;
    m(7, 6) = 1.0;
  } (q, {{"method", "givens"}, {"tolerance", "1e-10"}, {"verbose", "1"}});
}
)";
  auto u = ir::to_unitary(build(src, "raw", {QregArg{"q", 3}}), 3);
  // Ket-label (6,7) swap lands on little-endian indices 3 and 7: flip q2
  // when q0 and q1 are set.
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Identity(8, 8);
  expected(3, 3) = expected(7, 7) = 0;
  expected(3, 7) = expected(7, 3) = 1;
  CHECK(ir::max_abs_diff(u, expected) < 1e-8);
}

TEST_CASE("decompose_unitary: identity in, empty circuit out") {
  CHECK(decompose_unitary(Eigen::MatrixXcd::Identity(8, 8)).empty());
  CHECK(decompose_unitary(Eigen::MatrixXcd::Identity(2, 2)).empty());
}

TEST_CASE("decompose_unitary reconstructs random unitaries exactly") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto u = oracles::haar_unitary(4, rng);
    auto insts = decompose_unitary(u);
    CHECK(ir::max_abs_diff(ir::to_unitary(insts, 2), u) < 1e-8);
  }
  for (int trial = 0; trial < 20; ++trial) {
    auto u = oracles::haar_unitary(8, rng);
    auto insts = decompose_unitary(u);
    CHECK(ir::max_abs_diff(ir::to_unitary(insts, 3), u) < 1e-8);
  }
  for (int trial = 0; trial < 20; ++trial) {
    auto u = oracles::haar_unitary(2, rng);
    auto insts = decompose_unitary(u);
    CHECK(ir::max_abs_diff(ir::to_unitary(insts, 1), u) < 1e-10);
  }
}

TEST_CASE("decompose_unitary rejects bad inputs") {
  CHECK_THROWS_AS(decompose_unitary(Eigen::MatrixXcd::Identity(16, 16)),
                  TooManyQubitsForSynthesis);
  CHECK_THROWS_AS(decompose_unitary(Eigen::MatrixXcd::Identity(3, 3)),
                  DimensionMismatch);
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(4, 4);
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(decompose_unitary(bad), NotUnitary);
}

TEST_CASE("cross-language spellings flatten identically") {
  const char* xasm_src = R"(
__qpu__ void k1(qreg q) {
  H(q[0]);
  CX(q[0], q[1]);
  Rz(q[1], 0.5);
  Measure(q[0]);
}
)";
  const char* qasm_src = R"(
__qpu__ void k2(qreg q) {
  using qk::openqasm;
  creg c[1];
  h q[0];
  cx q[0],q[1];
  rz(0.5) q[1];
  measure q[0] -> c[0];
}
)";
  const char* quil_src = R"(
__qpu__ void k3(qreg q) {
  using qcor::quil;
  H 0
  CNOT 0 1
  RZ(0.5) 1
  MEASURE 0 ro[0]
}
)";
  auto f1 = build(xasm_src, "k1", {QregArg{"q", 2}}).flatten();
  auto f2 = build(qasm_src, "k2", {QregArg{"q", 2}}).flatten();
  auto f3 = build(quil_src, "k3", {QregArg{"q", 2}}).flatten();
  CHECK(f1 == f2);
  CHECK(f1 == f3);
}

TEST_CASE("language switching composes within one kernel body") {
  const char* src = R"(
__qpu__ void mixed(qreg q) {
  H(q[0]);
  using qk::openqasm;
  cx q[0],q[1];
  using qcor::xasm;
  Z(q[1]);
}
)";
  auto flat = build(src, "mixed", {QregArg{"q", 2}}).flatten();
  REQUIRE(flat.size() == 3);
  CHECK(flat[0].kind() == GateKind::H);
  CHECK(flat[1].kind() == GateKind::CX);
  CHECK(flat[2].kind() == GateKind::Z);
}

TEST_CASE("openqasm broadcast measure maps slots positionally") {
  const char* src = R"(
__qpu__ void bcast(qreg q) {
  using qk::openqasm;
  creg c[3];
  h q;
  measure q -> c;
}
)";
  auto flat = build(src, "bcast", {QregArg{"q", 3}}).flatten();
  REQUIRE(flat.size() == 6);
  for (int i = 0; i < 3; ++i) {
    CHECK(flat[i].kind() == GateKind::H);
    CHECK(flat[3 + i].kind() == GateKind::Measure);
    CHECK(flat[3 + i].classical_target() == static_cast<std::uint32_t>(i));
  }
}

TEST_CASE("openqasm u2/cu1/ccx lower to the native gate set") {
  const char* src = R"(
__qpu__ void lowered(qreg q) {
  using qk::openqasm;
  u2(0.1,0.2) q[0];
  cu1(0.3) q[0],q[1];
  ccx q[0],q[1],q[2];
  id q[0];
  barrier q[0],q[1];
}
)";
  auto c = build(src, "lowered", {QregArg{"q", 3}});
  auto flat = c.flatten();
  REQUIRE(flat.size() >= 2);
  CHECK(flat[0] == ir::u3(0, M_PI / 2, 0.1, 0.2));
  CHECK(flat[1] == ir::rot2(GateKind::CPhase, 0, 1, 0.3));

  // The ccx tail must act as a Toffoli on (q0, q1 -> q2).
  auto u = ir::to_unitary(c, 3);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Identity(8, 8);
  // undo the u2/cu1 prefix by composing its inverse
  ir::Circuit prefix("prefix");
  prefix.add(flat[0]);
  prefix.add(flat[1]);
  Eigen::MatrixXcd ccx = Eigen::MatrixXcd::Identity(8, 8);
  ccx(3, 3) = ccx(7, 7) = 0;
  ccx(3, 7) = ccx(7, 3) = 1;
  CHECK(ir::max_abs_diff(u, ccx * ir::to_unitary(prefix, 3)) < 1e-12);
}

TEST_CASE("standalone OpenQASM parses as one kernel with a declared size") {
  const char* src = R"(
OPENQASM 2.0;
include "qelib1.inc";
qreg r[2];
creg c[2];
h r[0];
cx r[0],r[1];
measure r -> c;
)";
  auto def = parse_openqasm_source(src, "prog");
  CHECK(def.name == "prog");
  REQUIRE(def.declared_qreg_size.has_value());
  CHECK(*def.declared_qreg_size == 2);

  KernelRegistry reg;
  reg.add(def);
  backend::StatevectorBackend be(5);
  auto buf = backend::qalloc(2);
  invoke(reg, "prog", be, buf, 512);
  std::int64_t total = 0;
  for (const auto& [key, n] : buf.counts) {
    CHECK((key == "00" || key == "11"));
    total += n;
  }
  CHECK(total == 512);
}

TEST_CASE("unsupported OpenQASM features are reported as such") {
  CHECK_THROWS_AS(build(R"(
__qpu__ void bad(qreg q) {
  using qk::openqasm;
  gate foo a { h a; }
}
)",
                        "bad", {QregArg{"q", 1}}),
                  UnsupportedQasmFeature);
  CHECK_THROWS_AS(build(R"(
__qpu__ void bad2(qreg q) {
  using qk::openqasm;
  creg c[1];
  if (c == 1) x q[0];
}
)",
                        "bad2", {QregArg{"q", 1}}),
                  UnsupportedQasmFeature);
  CHECK_THROWS_AS(parse_openqasm_source("qreg a[1];\nqreg b[1];\n", "two"),
                  UnsupportedQasmFeature);
}

TEST_CASE("standalone Quil infers the register size") {
  auto def = parse_quil_source("H 0\nCNOT 0 2\nMEASURE 2 ro[0]\n", "prog");
  REQUIRE(def.declared_qreg_size.has_value());
  CHECK(*def.declared_qreg_size == 3);
  KernelRegistry reg;
  reg.add(def);
  auto flat = instantiate(reg, "prog", {QregArg{"q", 3}}).flatten();
  REQUIRE(flat.size() == 3);
  CHECK(flat[0] == ir::gate(GateKind::H, 0));
  CHECK(flat[1] == ir::gate(GateKind::CX, 0, 2));
  CHECK(flat[2] == ir::measure(2, 0));
}

TEST_CASE("unsupported Quil instructions are reported as such") {
  CHECK_THROWS_AS(parse_quil_source("DECLARE ro BIT[2]\nH 0\n", "p"),
                  UnsupportedQuilFeature);
  CHECK_THROWS_AS(parse_quil_source("DEFGATE FOO:\n", "p"),
                  UnsupportedQuilFeature);
}

TEST_CASE("include directives splice relative to the including file") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "qk_frontend_inc_test";
  fs::create_directories(dir / "sub");
  {
    std::ofstream a(dir / "main.qk");
    a << "#include \"sub/lib.qk\"\n"
      << "__qpu__ void top(qreg q) { helper(q); }\n";
    std::ofstream b(dir / "sub" / "lib.qk");
    b << "__qpu__ void helper(qreg q) { H(q[0]); }\n";
  }
  auto defs = parse_file((dir / "main.qk").string());
  REQUIRE(defs.size() == 2);
  CHECK(defs[0].name == "helper");
  CHECK(defs[1].name == "top");

  CHECK_THROWS_AS(load_source((dir / "missing.qk").string()), FileError);

  {
    std::ofstream c(dir / "loop.qk");
    c << "#include \"loop.qk\"\n";
  }
  CHECK_THROWS_AS(load_source((dir / "loop.qk").string()), FileError);
  fs::remove_all(dir);
}

TEST_CASE("jit cache: identical source compiles once") {
  KernelRegistry reg;
  std::size_t base = reg.compile_count();
  auto names = reg.jit_compile(kBellXasm);
  REQUIRE(names.size() == 1);
  CHECK(names[0] == "bell");
  CHECK(reg.compile_count() == base + 1);
  reg.jit_compile(kBellXasm);
  CHECK(reg.compile_count() == base + 1);
  reg.jit_compile("__qpu__ void other(qreg q) { X(q[0]); }");
  CHECK(reg.compile_count() == base + 2);

  CHECK_THROWS_AS(reg.get_kernel("missing"), UnknownKernelName);
  auto handle = reg.get_kernel("bell");
  auto flat = handle({QregArg{"q", 2}}).flatten();
  CHECK(flat.size() == 4);
}

TEST_CASE("invoke runs a registered kernel end to end") {
  KernelRegistry reg;
  reg.jit_compile(kBellXasm);
  backend::StatevectorBackend be(21);
  auto buf = backend::qalloc(2);
  invoke(reg, "bell", be, buf, 1024);
  CHECK(buf.shots == 1024);
  for (const auto& [key, n] : buf.counts) CHECK((key == "00" || key == "11"));
}

TEST_CASE("duplicate kernel names are rejected") {
  KernelRegistry reg;
  reg.jit_compile(kBellXasm);
  CHECK_THROWS_AS(reg.jit_compile("__qpu__ void bell(qreg q) { X(q[0]); }"),
                  DuplicateKernel);
}

TEST_CASE("argument mismatches carry the kernel name") {
  KernelRegistry reg;
  reg.jit_compile(kBellXasm);
  CHECK_THROWS_AS(instantiate(reg, "bell", {}), ArgumentMismatch);
  CHECK_THROWS_AS(instantiate(reg, "bell", {1ll}), ArgumentMismatch);
  CHECK_THROWS_AS(instantiate(reg, "nope", {QregArg{"q", 2}}), UnresolvedKernel);
}

TEST_CASE("NISQ mode rejects branching on measurement results") {
  const char* src = R"(
__qpu__ void branchy(qreg q) {
  H(q[0]);
  bool b = Measure(q[0]);
  if (b) {
    X(q[1]);
  } else {
    Z(q[1]);
  }
}
)";
  KernelRegistry reg;
  reg.jit_compile(src);
  CHECK_THROWS_AS(instantiate(reg, "branchy", {QregArg{"q", 2}}),
                  MeasurementDependentBranchInNisqMode);

  // Without a use of the bit the same kernel is a legal NISQ circuit.
  const char* passive = R"(
__qpu__ void sample(qreg q) {
  H(q[0]);
  bool b = Measure(q[0]);
  X(q[1]);
}
)";
  reg.jit_compile(passive);
  auto flat = instantiate(reg, "sample", {QregArg{"q", 2}}).flatten();
  REQUIRE(flat.size() == 3);
  CHECK(flat[1] == ir::measure(0));
}

namespace {
struct ScriptedExecutor final : LiveExecutor {
  std::vector<int> script;
  std::size_t at = 0;
  std::vector<ir::Instruction> applied;
  void apply(const ir::Instruction& inst) override { applied.push_back(inst); }
  int measure(std::uint32_t) override { return script.at(at++); }
};
}  // namespace

TEST_CASE("FTQC mode branches on live measurement results") {
  const char* src = R"(
__qpu__ void branchy(qreg q) {
  H(q[0]);
  bool b = Measure(q[0]);
  if (b) {
    X(q[1]);
  } else {
    Z(q[1]);
  }
}
)";
  KernelRegistry reg;
  reg.jit_compile(src);

  ScriptedExecutor one;
  one.script = {1};
  InstantiateOptions opts;
  opts.mode = ExecutionMode::ftqc;
  opts.live = &one;
  instantiate(reg, "branchy", {QregArg{"q", 2}}, opts);
  REQUIRE(one.applied.size() == 2);
  CHECK(one.applied[0].kind() == GateKind::H);
  CHECK(one.applied[1].kind() == GateKind::X);

  ScriptedExecutor zero;
  zero.script = {0};
  opts.live = &zero;
  instantiate(reg, "branchy", {QregArg{"q", 2}}, opts);
  REQUIRE(zero.applied.size() == 2);
  CHECK(zero.applied[1].kind() == GateKind::Z);
}

TEST_CASE("FTQC streaming against a simulator session stays consistent") {
  KernelRegistry reg;
  reg.jit_compile(R"(
__qpu__ void pair(qreg q) {
  H(q[0]);
  CX(q[0], q[1]);
  bool a = Measure(q[0]);
  bool b = Measure(q[1]);
  if (a != b) {
    X(q[0]);
  }
}
)");
  backend::StatevectorBackend be(17);
  for (int run = 0; run < 50; ++run) {
    auto session = be.start_session(2);
    SessionExecutor exec(*session);
    InstantiateOptions opts;
    opts.mode = ExecutionMode::ftqc;
    opts.live = &exec;
    instantiate(reg, "pair", {QregArg{"q", 2}}, opts);
    const auto& log = session->measurement_log();
    REQUIRE(log.size() == 2);
    CHECK(log[0] == log[1]);
    session->finish();
  }
}

TEST_CASE("syntax errors carry line and column information") {
  try {
    parse_kernels("__qpu__ void f(qreg q) {\n  H(q[0);\n}\n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.pos().line == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_kernels("not a kernel"), SyntaxError);
  CHECK_THROWS_AS(parse_kernels(""), SyntaxError);
  CHECK_THROWS_AS(parse_kernels("__qpu__ void f(qreg q) { Rz(0.5, q[0]); }"),
                  SyntaxError);
}

TEST_CASE("parser survives arbitrary byte input (fuzz property)") {
  std::mt19937 rng(20260823);
  auto try_parse = [&](const std::string& s) {
    try {
      parse_kernels(s);
    } catch (const Error&) {
      // expected failure mode
    } catch (...) {
      CAPTURE(s);
      FAIL("non-qk exception escaped the parser");
    }
  };

  std::uniform_int_distribution<int> len_dist(0, 200);
  std::uniform_int_distribution<int> byte_dist(0, 255);
  for (int i = 0; i < 300; ++i) {
    std::string s;
    int len = len_dist(rng);
    for (int j = 0; j < len; ++j)
      s.push_back(static_cast<char>(byte_dist(rng)));
    try_parse(s);
  }

  const std::string structural = "__qpu__void(){};qregifforMeasure<=>::0.5[]{}#\"";
  std::uniform_int_distribution<std::size_t> pick(0, structural.size() - 1);
  for (int i = 0; i < 300; ++i) {
    std::string s;
    int len = len_dist(rng);
    for (int j = 0; j < len; ++j) s.push_back(structural[pick(rng)]);
    try_parse(s);
  }

  std::string bell = kBellXasm;
  std::uniform_int_distribution<std::size_t> at(0, bell.size() - 1);
  for (int i = 0; i < 200; ++i) {
    std::string s = bell;
    s[at(rng)] = static_cast<char>(byte_dist(rng));
    try_parse(s);
  }
}

TEST_CASE("quil region inside a kernel uses the qreg parameter") {
  const char* src = R"(
__qpu__ void q3(qreg qq) {
  using qk::quil;
  RZ(0.5) 2
  using qk::xasm;
  H(qq[0]);
}
)";
  auto flat = build(src, "q3", {QregArg{"qq", 3}}).flatten();
  REQUIRE(flat.size() == 2);
  CHECK(flat[0] == ir::rot(GateKind::Rz, 2, 0.5));
  CHECK(flat[1] == ir::gate(GateKind::H, 0));
}
