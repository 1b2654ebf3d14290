#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <random>
#include <thread>

#include "qk/frontend/instantiate.hpp"
#include "qk/frontend/parser.hpp"
#include "qk/frontend/registry.hpp"
#include "qk/ir/unitary.hpp"
#include "qk/passes/passes.hpp"
#include "support/oracles.hpp"

using namespace qk;
using qk::ir::GateKind;
using qk::ir::Instruction;

namespace {

ir::Circuit circ(std::vector<Instruction> v) {
  ir::Circuit c("t");
  c.add_all(v);
  return c;
}

}  // namespace

TEST_CASE("optimization level 0 is the identity pipeline") {
  auto c = circ({ir::gate(GateKind::H, 0), ir::gate(GateKind::CX, 0, 1)});
  auto [out, stats] = passes::run_level(0, c);
  CHECK(out.flatten() == c.flatten());
  CHECK(stats.empty());
}

TEST_CASE("level 1 annihilates a T/Tdg quartet") {
  auto c = circ({ir::gate(GateKind::T, 0), ir::gate(GateKind::T, 0),
                 ir::gate(GateKind::Tdg, 0), ir::gate(GateKind::Tdg, 0)});
  auto [out, stats] = passes::run_level(1, c);
  CHECK(out.flatten().empty());
  REQUIRE(stats.size() == 3);
  CHECK(stats[0].pass_name == "rotation-folding");
  CHECK(stats[1].pass_name == "single-qubit-gate-merging");
  CHECK(stats[2].pass_name == "circuit-optimizer");
}

TEST_CASE("unknown pass names and levels are rejected") {
  auto c = circ({ir::gate(GateKind::H, 0)});
  CHECK_THROWS_AS(passes::run_pass("no-such-pass", c), passes::UnknownPass);
  CHECK_THROWS_AS(passes::run_level(2, c), passes::InvalidOptLevel);
  CHECK_THROWS_AS(passes::run_level(-1, c), passes::InvalidOptLevel);
}

TEST_CASE("circuit-optimizer removes inverse pairs and dead rotations") {
  CHECK(passes::circuit_optimizer(
            {ir::gate(GateKind::H, 0), ir::gate(GateKind::H, 0)})
            .empty());

  auto kept = passes::circuit_optimizer({ir::gate(GateKind::CX, 0, 1),
                                         ir::gate(GateKind::X, 2),
                                         ir::gate(GateKind::CX, 0, 1)});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0] == ir::gate(GateKind::X, 2));

  CHECK(passes::circuit_optimizer({ir::rot(GateKind::Rz, 0, 2 * M_PI)}).empty());
  CHECK(passes::circuit_optimizer({ir::rot(GateKind::Rz, 0, -4 * M_PI)}).empty());

  // A blocker on a shared qubit pins both gates in place.
  auto blocked = passes::circuit_optimizer({ir::gate(GateKind::CX, 0, 1),
                                            ir::gate(GateKind::H, 0),
                                            ir::gate(GateKind::CX, 0, 1)});
  CHECK(blocked.size() == 3);

  // CZ and Swap cancel regardless of operand order, CX only in matching
  // order.
  CHECK(passes::circuit_optimizer(
            {ir::gate(GateKind::CZ, 0, 1), ir::gate(GateKind::CZ, 1, 0)})
            .empty());
  CHECK(passes::circuit_optimizer(
            {ir::gate(GateKind::Swap, 2, 3), ir::gate(GateKind::Swap, 3, 2)})
            .empty());
  CHECK(passes::circuit_optimizer(
            {ir::gate(GateKind::CX, 0, 1), ir::gate(GateKind::CX, 1, 0)})
            .size() == 2);

  CHECK(passes::circuit_optimizer(
            {ir::gate(GateKind::S, 0), ir::gate(GateKind::Sdg, 0)})
            .empty());
  CHECK(passes::circuit_optimizer(
            {ir::gate(GateKind::Tdg, 1), ir::gate(GateKind::T, 1)})
            .empty());
}

TEST_CASE("rotation-folding merges same-axis rotations across commuting gates") {
  auto merged = passes::rotation_folding(
      {ir::rot(GateKind::Rz, 0, 0.3), ir::rot(GateKind::Rz, 0, 0.5)});
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].kind() == GateKind::Rz);
  CHECK(merged[0].params()[0] == doctest::Approx(0.8));

  // Control side of CX is diagonal, so the Rz pair meets up behind it.
  auto over_ctrl = passes::rotation_folding({ir::rot(GateKind::Rz, 0, 0.3),
                                             ir::gate(GateKind::CX, 0, 1),
                                             ir::rot(GateKind::Rz, 0, 0.5)});
  REQUIRE(over_ctrl.size() == 2);
  CHECK(over_ctrl[0] == ir::gate(GateKind::CX, 0, 1));
  CHECK(over_ctrl[1].params()[0] == doctest::Approx(0.8));

  // Target side blocks Rz.
  auto blocked = passes::rotation_folding({ir::rot(GateKind::Rz, 1, 0.3),
                                           ir::gate(GateKind::CX, 0, 1),
                                           ir::rot(GateKind::Rz, 1, 0.5)});
  CHECK(blocked.size() == 3);

  // Target side passes Rx.
  auto rx = passes::rotation_folding({ir::rot(GateKind::Rx, 1, 0.3),
                                      ir::gate(GateKind::CX, 0, 1),
                                      ir::rot(GateKind::Rx, 1, 0.5)});
  REQUIRE(rx.size() == 2);
  CHECK(rx[0] == ir::gate(GateKind::CX, 0, 1));
  CHECK(rx[1].params()[0] == doctest::Approx(0.8));

  // Rz and U1 share an axis up to global phase.
  auto mixed = passes::rotation_folding(
      {ir::rot(GateKind::Rz, 0, 0.2), ir::rot(GateKind::U1, 0, 0.3)});
  REQUIRE(mixed.size() == 1);
  CHECK(mixed[0].kind() == GateKind::U1);
  CHECK(mixed[0].params()[0] == doctest::Approx(0.5));

  // CPhase is symmetric in its operands.
  auto cp = passes::rotation_folding({ir::rot2(GateKind::CPhase, 0, 1, 0.2),
                                      ir::rot2(GateKind::CPhase, 1, 0, 0.3)});
  REQUIRE(cp.size() == 1);
  CHECK(cp[0].params()[0] == doctest::Approx(0.5));

  // Opposite angles vanish entirely.
  CHECK(passes::rotation_folding(
            {ir::rot(GateKind::Ry, 2, 0.7), ir::rot(GateKind::Ry, 2, -0.7)})
            .empty());
}

TEST_CASE("single-qubit-gate-merging collapses runs into one gate") {
  auto run = passes::single_qubit_gate_merging({ir::gate(GateKind::H, 0),
                                                ir::gate(GateKind::S, 0),
                                                ir::gate(GateKind::H, 0)});
  REQUIRE(run.size() == 1);
  Eigen::Matrix2cd expected = ir::gate_matrix_1q(GateKind::H, {}) *
                              ir::gate_matrix_1q(GateKind::S, {}) *
                              ir::gate_matrix_1q(GateKind::H, {});
  auto got = ir::gate_matrix_1q(run[0].kind(), run[0].params());
  CHECK(ir::phase_equivalent(got, expected, 1e-9));

  CHECK(passes::single_qubit_gate_merging(
            {ir::gate(GateKind::X, 0), ir::gate(GateKind::X, 0)})
            .empty());

  auto solo = passes::single_qubit_gate_merging({ir::gate(GateKind::T, 0)});
  REQUIRE(solo.size() == 1);
  CHECK(solo[0] == ir::gate(GateKind::T, 0));

  // A gate on another wire sits between run members without blocking them.
  auto interleaved = passes::single_qubit_gate_merging(
      {ir::gate(GateKind::H, 0), ir::gate(GateKind::X, 1),
       ir::gate(GateKind::S, 0)});
  REQUIRE(interleaved.size() == 2);
  CHECK(interleaved[0].qubits()[0].index == 0);
  CHECK(interleaved[1] == ir::gate(GateKind::X, 1));
  auto u_in = ir::to_unitary(std::vector<Instruction>{ir::gate(GateKind::H, 0),
                                                      ir::gate(GateKind::X, 1),
                                                      ir::gate(GateKind::S, 0)},
                             2);
  auto u_out = ir::to_unitary(interleaved, 2);
  CHECK(ir::phase_equivalent(u_in, u_out, 1e-9));

  // Measure interrupts a run.
  auto with_measure = passes::single_qubit_gate_merging(
      {ir::gate(GateKind::H, 0), ir::measure(0), ir::gate(GateKind::H, 0)});
  CHECK(with_measure.size() == 3);
}

TEST_CASE("mid-circuit measurement blocks cancellation") {
  auto kept = passes::circuit_optimizer(
      {ir::gate(GateKind::H, 0), ir::measure(0), ir::gate(GateKind::H, 0)});
  CHECK(kept.size() == 3);

  auto suffix = passes::circuit_optimizer({ir::gate(GateKind::H, 0),
                                           ir::gate(GateKind::H, 0),
                                           ir::measure(0), ir::measure(1)});
  REQUIRE(suffix.size() == 2);
  CHECK(suffix[0] == ir::measure(0));
  CHECK(suffix[1] == ir::measure(1));
}

TEST_CASE("every pass is sound, non-growing, and idempotent on random circuits") {
  std::mt19937_64 rng(4242);
  const std::vector<std::string> names = {
      "rotation-folding", "single-qubit-gate-merging", "circuit-optimizer"};
  for (int trial = 0; trial < 200; ++trial) {
    auto c = oracles::random_unitary_circuit(5, 30, rng);
    auto u_in = ir::to_unitary(c, 5);

    auto [lv1, lv1_stats] = passes::run_level(1, c);
    CHECK(ir::phase_equivalent(ir::to_unitary(lv1, 5), u_in, 1e-9));
    CHECK(lv1.flatten().size() <= c.flatten().size());

    if (trial < 50) {
      for (const auto& name : names) {
        auto [once, s1] = passes::run_pass(name, c);
        CHECK(ir::phase_equivalent(ir::to_unitary(once, 5), u_in, 1e-9));
        CHECK(s1.gates_after.total_gates <= s1.gates_before.total_gates);
        auto [twice, s2] = passes::run_pass(name, once);
        CHECK(twice.flatten() == once.flatten());
      }
    }
  }
}

TEST_CASE("level 1 strictly shrinks every corpus kernel") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(QK_KERNELS_DIR) / "cancellation";
  REQUIRE(fs::exists(dir));
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".qk") continue;
    ++files;
    frontend::KernelRegistry reg;
    auto defs = frontend::parse_file(entry.path().string());
    for (const auto& def : defs) reg.add(def);
    for (const auto& def : defs) {
      auto c = frontend::instantiate(reg, def.name,
                                     {frontend::QregArg{"q", 5}});
      auto [out, stats] = passes::run_level(1, c);
      CAPTURE(entry.path().filename().string());
      CHECK(out.flatten().size() < c.flatten().size());
      double total_reduction =
          1.0 - static_cast<double>(out.flatten().size()) /
                    static_cast<double>(c.flatten().size());
      CHECK(total_reduction > 0.0);
    }
  }
  CHECK(files >= 5);
}

TEST_CASE("pass statistics are consistent and serialize to JSON") {
  auto c = circ({ir::gate(GateKind::H, 0), ir::gate(GateKind::H, 0),
                 ir::gate(GateKind::CX, 0, 1), ir::measure(0), ir::measure(1)});
  auto [out, st] = passes::run_pass("circuit-optimizer", c);
  CHECK(st.pass_name == "circuit-optimizer");
  CHECK(st.gates_before.total_gates == 5);
  CHECK(st.gates_after.total_gates == 3);
  CHECK(st.reduction_fraction == doctest::Approx(2.0 / 5.0));
  CHECK(st.wall_time_ms >= 0.0);

  auto [empty_out, empty_st] = passes::run_pass("circuit-optimizer", circ({}));
  CHECK(empty_st.reduction_fraction == 0.0);

  auto text = passes::stats_to_json({st});
  auto j = nlohmann::json::parse(text);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  CHECK(j[0]["pass"] == "circuit-optimizer");
  CHECK(j[0]["before"]["total"] == 5);
  CHECK(j[0]["after"]["total"] == 3);
  CHECK(j[0]["before"]["histogram"]["H"] == 2);
}

TEST_CASE("custom passes can be registered and dispatched") {
  passes::register_pass("nop-for-test", [](std::vector<Instruction> v) {
    return v;
  });
  auto names = passes::available_passes();
  CHECK(std::find(names.begin(), names.end(), "nop-for-test") != names.end());
  CHECK(std::find(names.begin(), names.end(), "circuit-optimizer") !=
        names.end());
  auto c = circ({ir::gate(GateKind::H, 0)});
  auto [out, st] = passes::run_pass("nop-for-test", c);
  CHECK(out.flatten() == c.flatten());
}

TEST_CASE("passes run concurrently on distinct circuits") {
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      std::mt19937_64 rng(1000 + t);
      for (int i = 0; i < 20; ++i) {
        auto c = oracles::random_unitary_circuit(4, 20, rng);
        auto u_in = ir::to_unitary(c, 4);
        auto [out, stats] = passes::run_level(1, c);
        if (!ir::phase_equivalent(ir::to_unitary(out, 4), u_in, 1e-9))
          ++failures;
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(failures == 0);
}
