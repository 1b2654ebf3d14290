#include <chrono>
#include <mutex>
#include <nlohmann/json.hpp>

#include "qk/ir/gate.hpp"
#include "qk/passes/passes.hpp"

namespace qk::passes {

namespace {

std::mutex table_mutex;

std::map<std::string, PassFn>& pass_table() {
  static std::map<std::string, PassFn> table = {
      {"circuit-optimizer", circuit_optimizer},
      {"rotation-folding", rotation_folding},
      {"single-qubit-gate-merging", single_qubit_gate_merging},
  };
  return table;
}

nlohmann::json stats_json(const ir::CircuitStats& s) {
  nlohmann::json h = nlohmann::json::object();
  for (const auto& [kind, count] : s.histogram) h[ir::gate_name(kind)] = count;
  return {{"total", s.total_gates},
          {"two_qubit", s.two_qubit_count},
          {"depth", s.depth},
          {"histogram", h}};
}

}  // namespace

void register_pass(const std::string& name, PassFn fn) {
  std::lock_guard lock(table_mutex);
  pass_table()[name] = std::move(fn);
}

std::vector<std::string> available_passes() {
  std::lock_guard lock(table_mutex);
  std::vector<std::string> names;
  for (const auto& [name, fn] : pass_table()) names.push_back(name);
  return names;
}

std::pair<ir::Circuit, PassStats> run_pass(const std::string& name,
                                           const ir::Circuit& c) {
  PassFn fn;
  {
    std::lock_guard lock(table_mutex);
    auto it = pass_table().find(name);
    if (it == pass_table().end())
      throw UnknownPass("unknown pass '" + name + "'");
    fn = it->second;
  }

  auto flat = c.flatten();
  PassStats st;
  st.pass_name = name;
  st.gates_before = ir::stats(flat);
  const auto t0 = std::chrono::steady_clock::now();
  auto optimized = fn(std::move(flat));
  const auto t1 = std::chrono::steady_clock::now();
  st.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  st.gates_after = ir::stats(optimized);
  st.reduction_fraction =
      st.gates_before.total_gates == 0
          ? 0.0
          : 1.0 - static_cast<double>(st.gates_after.total_gates) /
                      static_cast<double>(st.gates_before.total_gates);

  ir::Circuit out(c.name());
  out.add_all(optimized);
  return {std::move(out), std::move(st)};
}

const std::vector<std::string>& level_passes(int level) {
  static const std::vector<std::string> level0 = {};
  static const std::vector<std::string> level1 = {
      "rotation-folding", "single-qubit-gate-merging", "circuit-optimizer"};
  if (level == 0) return level0;
  if (level == 1) return level1;
  throw InvalidOptLevel("optimization level must be 0 or 1, got " +
                        std::to_string(level));
}

std::pair<ir::Circuit, std::vector<PassStats>> run_level(int level,
                                                         const ir::Circuit& c) {
  const auto& names = level_passes(level);
  std::vector<PassStats> all;
  ir::Circuit current(c.name());
  current.add_all(c.flatten());
  for (const auto& name : names) {
    auto [next, st] = run_pass(name, current);
    current = std::move(next);
    all.push_back(std::move(st));
  }
  return {std::move(current), std::move(all)};
}

std::string stats_to_json(const std::vector<PassStats>& stats) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stats) {
    arr.push_back({{"pass", s.pass_name},
                   {"ms", s.wall_time_ms},
                   {"reduction", s.reduction_fraction},
                   {"before", stats_json(s.gates_before)},
                   {"after", stats_json(s.gates_after)}});
  }
  return arr.dump(2);
}

}  // namespace qk::passes
