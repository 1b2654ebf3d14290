// qkc: compile kernels to optimized/placed listings, or run them end to end
// against a backend and print counts or expectation values as JSON.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qk/backend/backend.hpp"
#include "qk/backend/statevector.hpp"
#include "qk/frontend/parser.hpp"
#include "qk/frontend/registry.hpp"
#include "qk/hybrid/hybrid.hpp"
#include "qk/hybrid/operators.hpp"
#include "qk/ir/printing.hpp"
#include "qk/mitigation/mitigation.hpp"
#include "qk/passes/passes.hpp"
#include "qk/placement/placement.hpp"

namespace {

using qk::frontend::KernelArgs;
using qk::frontend::KernelDef;
using qk::frontend::QregArg;

struct DriverConfig {
  std::vector<std::string> inputs;
  std::string qpu = "sim";
  std::int64_t shots = 1024;
  int opt = 0;
  std::vector<std::string> opt_passes;
  std::string placement;
  std::string coupling_graph;
  std::vector<std::uint32_t> qubit_map;
  std::vector<std::string> mitigation;
  std::string qrt = "nisq";
  std::string entry;
  std::string args_text;
  std::string observable;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> qreg_size;
  int inject_x = -1;
  bool emit_pass_stats = false;
};

// The paper's invocations spell long options with a single dash (-qpu,
// -shots, ...). Rewrite exactly those so the parser sees ordinary --flags.
std::vector<std::string> rewrite_paper_flags(int argc, char** argv) {
  static const std::set<std::string> paper = {"qpu",       "shots", "opt",
                                             "opt-pass",  "qubit-map",
                                             "em",        "qrt"};
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    std::string tok = argv[i];
    if (tok.size() > 1 && tok[0] == '-' && tok[1] != '-') {
      const auto eq = tok.find('=');
      const std::string body = tok.substr(1, eq == std::string::npos
                                                 ? std::string::npos
                                                 : eq - 1);
      if (paper.count(body)) tok.insert(0, "-");
    }
    out.push_back(std::move(tok));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qk::frontend::FileError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reshape "line L:C: msg" into "path:L:C: msg".
std::string with_file(const std::string& path, const std::string& msg) {
  if (msg.rfind("line ", 0) == 0) return path + ":" + msg.substr(5);
  return path + ": " + msg;
}

std::vector<std::string> load_inputs(qk::frontend::KernelRegistry& reg,
                                     const std::vector<std::string>& paths) {
  std::vector<std::string> loaded;
  for (const auto& path : paths) {
    const auto ext = std::filesystem::path(path).extension().string();
    const auto stem = std::filesystem::path(path).stem().string();
    try {
      if (ext == ".qasm") {
        auto def = qk::frontend::parse_openqasm_source(read_file(path), stem);
        loaded.push_back(def.name);
        reg.add(std::move(def));
      } else if (ext == ".quil") {
        auto def = qk::frontend::parse_quil_source(read_file(path), stem);
        loaded.push_back(def.name);
        reg.add(std::move(def));
      } else {
        for (auto& def : qk::frontend::parse_file(path)) {
          loaded.push_back(def.name);
          reg.add(std::move(def));
        }
      }
    } catch (const qk::frontend::SyntaxError& e) {
      throw qk::Error(with_file(path, e.what()));
    }
  }
  return loaded;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::string resolve_entry(const DriverConfig& cfg,
                          const qk::frontend::KernelRegistry& reg,
                          const std::vector<std::string>& loaded) {
  if (!cfg.entry.empty()) {
    reg.get(cfg.entry);  // throws UnknownKernelName with the bad name
    return cfg.entry;
  }
  if (loaded.size() == 1) return loaded.front();
  if (loaded.empty()) throw qk::Error("no kernels found in the input files");
  throw qk::Error("several kernels loaded (" + join(loaded, ", ") +
                  "); select one with --entry");
}

// Splits on commas that sit outside [...] groups.
std::vector<std::string> split_args(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : text) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    cur += ch;
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& tok) {
  std::size_t used = 0;
  const double v = std::stod(tok, &used);
  if (used != tok.size()) throw std::invalid_argument(tok);
  return v;
}

long long parse_int(const std::string& tok) {
  std::size_t used = 0;
  const long long v = std::stoll(tok, &used);
  if (used != tok.size()) throw std::invalid_argument(tok);
  return v;
}

std::vector<std::string> vector_elements(const std::string& tok) {
  if (tok.size() < 2 || tok.front() != '[' || tok.back() != ']')
    throw std::invalid_argument(tok);
  std::vector<std::string> out;
  const auto inner = tok.substr(1, tok.size() - 2);
  if (trim(inner).empty()) return out;
  for (const auto& e : split_args(inner)) out.push_back(trim(e));
  return out;
}

KernelArgs build_args(const KernelDef& def, const std::string& args_text,
                      std::uint32_t width) {
  std::vector<std::string> tokens;
  if (!trim(args_text).empty())
    for (const auto& t : split_args(args_text)) tokens.push_back(trim(t));

  KernelArgs args;
  std::size_t at = 0;
  for (const auto& param : def.signature.params) {
    if (param.type == qk::frontend::ParamType::qreg) {
      args.emplace_back(QregArg{param.name, width});
      continue;
    }
    if (at >= tokens.size())
      throw qk::Error("missing value for parameter '" + param.name +
                      "' of kernel '" + def.name + "'");
    const std::string& tok = tokens[at++];
    try {
      switch (param.type) {
        case qk::frontend::ParamType::real:
          args.emplace_back(parse_real(tok));
          break;
        case qk::frontend::ParamType::integer:
          args.emplace_back(parse_int(tok));
          break;
        case qk::frontend::ParamType::real_vector: {
          std::vector<double> v;
          for (const auto& e : vector_elements(tok)) v.push_back(parse_real(e));
          args.emplace_back(std::move(v));
          break;
        }
        case qk::frontend::ParamType::int_vector: {
          std::vector<long long> v;
          for (const auto& e : vector_elements(tok)) v.push_back(parse_int(e));
          args.emplace_back(std::move(v));
          break;
        }
        default:
          break;
      }
    } catch (const std::exception&) {
      throw qk::Error("cannot parse '" + tok + "' for parameter '" +
                      param.name + "' of kernel '" + def.name + "'");
    }
  }
  if (at != tokens.size())
    throw qk::Error("kernel '" + def.name + "' takes " + std::to_string(at) +
                    " classical arguments, got " + std::to_string(tokens.size()));
  return args;
}

// Register width: explicit flag, then an OpenQASM declaration, then the
// smallest width at which the kernel instantiates (fixed-index kernels and
// decompose blocks pin their own size that way). Kernels that read q.size()
// are width-dependent and want an explicit --qreg-size.
std::uint32_t resolve_width(const DriverConfig& cfg, const KernelDef& def,
                            const qk::frontend::KernelRegistry& reg) {
  if (cfg.qreg_size) return *cfg.qreg_size;
  if (def.declared_qreg_size) return *def.declared_qreg_size;
  std::string last_error;
  for (std::uint32_t w = 1;
       w <= qk::backend::StatevectorBackend::kMaxQubits; ++w) {
    try {
      const auto probe = qk::frontend::instantiate(
          reg, def.name, build_args(def, cfg.args_text, w));
      return std::max(probe.min_width(), 1u);
    } catch (const qk::frontend::MeasurementDependentBranchInNisqMode&) {
      throw qk::Error("cannot infer a register size for streaming kernel '" +
                      def.name + "'; pass --qreg-size");
    } catch (const qk::Error& e) {
      last_error = e.what();
    }
  }
  throw qk::Error("kernel '" + def.name +
                  "' does not fit any register size: " + last_error);
}

qk::placement::CouplingGraph resolve_graph(const std::string& spec) {
  if (std::filesystem::exists(spec))
    return qk::placement::load_coupling_graph_file(spec);
  return qk::placement::builtin_graph(spec);
}

struct PreparedCircuit {
  qk::ir::Circuit circuit{"empty"};
  std::vector<qk::passes::PassStats> stats;
};

qk::ir::Circuit run_placement(const DriverConfig& cfg,
                              const qk::ir::Circuit& c) {
  const bool wanted = !cfg.placement.empty() || !cfg.coupling_graph.empty();
  if (!wanted) {
    if (!cfg.qubit_map.empty())
      return qk::placement::apply_qubit_map(c, cfg.qubit_map);
    return c;
  }
  if (cfg.coupling_graph.empty())
    throw qk::Error("placement needs --coupling-graph (builtin name or file)");
  const auto graph = resolve_graph(cfg.coupling_graph);
  const auto strategy = qk::placement::parse_strategy(
      cfg.placement.empty() ? "ssp" : cfg.placement);
  std::optional<std::vector<std::uint32_t>> initial;
  if (!cfg.qubit_map.empty()) initial = cfg.qubit_map;
  return qk::placement::place(c, graph, strategy, initial).circuit;
}

PreparedCircuit prepare(const DriverConfig& cfg,
                        const qk::frontend::KernelRegistry& reg,
                        const std::string& entry, std::uint32_t width) {
  PreparedCircuit out;
  out.circuit = qk::frontend::instantiate(
      reg, entry, build_args(reg.get(entry), cfg.args_text, width));

  if (!cfg.opt_passes.empty()) {
    for (const auto& name : cfg.opt_passes) {
      auto [next, st] = qk::passes::run_pass(name, out.circuit);
      out.circuit = std::move(next);
      out.stats.push_back(std::move(st));
    }
  } else if (cfg.opt != 0) {
    auto [next, st] = qk::passes::run_level(cfg.opt, out.circuit);
    out.circuit = std::move(next);
    out.stats = std::move(st);
  }
  return out;
}

std::unique_ptr<qk::backend::Backend> make_backend(const DriverConfig& cfg) {
  std::unique_ptr<qk::backend::Backend> be;
  try {
    be = qk::backend::create_backend(cfg.qpu);
  } catch (const qk::backend::UnknownBackend& e) {
    throw qk::Error(std::string(e.what()) + "; available backends: " +
                    join(qk::backend::available_backends(), ", "));
  }
  if (!cfg.mitigation.empty())
    be = qk::mitigation::decorate(std::move(be), cfg.mitigation);
  if (cfg.seed) be->set_seed(*cfg.seed);
  return be;
}

int cmd_compile(const DriverConfig& cfg) {
  qk::frontend::KernelRegistry reg;
  const auto loaded = load_inputs(reg, cfg.inputs);
  const auto entry = resolve_entry(cfg, reg, loaded);
  const auto width = resolve_width(cfg, reg.get(entry), reg);

  auto prepared = prepare(cfg, reg, entry, width);
  const auto placed = run_placement(cfg, prepared.circuit);

  std::cout << qk::ir::print_circuit(placed);
  if (cfg.emit_pass_stats)
    std::cout << qk::passes::stats_to_json(prepared.stats) << "\n";
  return 0;
}

// Streaming shot: plain Measure statements are the shot's readout and keep
// their classical slots; LetBit measurements only feed control flow.
class StreamingShot final : public qk::frontend::LiveExecutor {
 public:
  explicit StreamingShot(qk::backend::Session& session) : session_(session) {}

  void apply(const qk::ir::Instruction& inst) override {
    if (inst.kind() == qk::ir::GateKind::Measure) {
      const auto q = inst.qubits()[0];
      output_[inst.classical_target().value_or(q.index)] =
          session_.measure(q);
    } else if (inst.kind() == qk::ir::GateKind::Reset) {
      session_.reset(inst.qubits()[0]);
    } else {
      session_.apply(inst);
    }
  }

  int measure(std::uint32_t qubit) override {
    return session_.measure(qk::ir::QubitRef{qubit});
  }

  std::string key() const {
    std::string k;
    for (const auto& [slot, bit] : output_) k += static_cast<char>('0' + bit);
    return k;
  }

 private:
  qk::backend::Session& session_;
  std::map<std::uint32_t, int> output_;
};

int run_ftqc(const DriverConfig& cfg, const qk::frontend::KernelRegistry& reg,
             const std::string& entry, std::uint32_t width,
             qk::backend::Backend& be) {
  if (!be.supports_streaming())
    throw qk::Error("backend '" + be.name() +
                    "' cannot stream; ftqc mode unavailable");
  if (cfg.inject_x >= 0 && static_cast<std::uint32_t>(cfg.inject_x) >= width)
    throw qk::Error("--inject-x index " + std::to_string(cfg.inject_x) +
                    " outside the " + std::to_string(width) +
                    "-qubit register");

  const auto args = build_args(reg.get(entry), cfg.args_text, width);
  auto buf = qk::backend::qalloc(width);
  for (std::int64_t shot = 0; shot < cfg.shots; ++shot) {
    auto session = be.start_session(width);
    if (cfg.inject_x >= 0)
      session->apply(
          qk::ir::gate(qk::ir::GateKind::X,
                       static_cast<std::uint32_t>(cfg.inject_x)));
    StreamingShot exec(*session);
    qk::frontend::InstantiateOptions opts;
    opts.mode = qk::frontend::ExecutionMode::ftqc;
    opts.live = &exec;
    qk::frontend::instantiate(reg, entry, args, opts);
    session->finish();
    ++buf.counts[exec.key()];
  }
  buf.shots = cfg.shots;
  std::cout << qk::backend::counts_to_json(buf) << "\n";
  return 0;
}

int cmd_run(const DriverConfig& cfg) {
  qk::frontend::KernelRegistry reg;
  const auto loaded = load_inputs(reg, cfg.inputs);
  const auto entry = resolve_entry(cfg, reg, loaded);
  const auto width = resolve_width(cfg, reg.get(entry), reg);

  if (cfg.qrt != "nisq" && cfg.qrt != "ftqc")
    throw qk::Error("unknown runtime mode '" + cfg.qrt +
                    "' (expected nisq or ftqc)");
  if (cfg.inject_x >= 0 && cfg.qrt != "ftqc")
    throw qk::Error("--inject-x is an ftqc-mode hook; add -qrt ftqc");

  auto be = make_backend(cfg);
  if (cfg.qrt == "ftqc") return run_ftqc(cfg, reg, entry, width, *be);

  auto prepared = prepare(cfg, reg, entry, width);

  if (!cfg.observable.empty()) {
    const auto op = qk::hybrid::parse_pauli(cfg.observable);
    if (!op.is_hermitian())
      throw qk::Error("observable is not Hermitian: " + op.str());
    const auto obs = qk::hybrid::observe(op, prepared.circuit);
    double acc = obs.offset.real();
    for (const auto& term : obs.terms) {
      const auto placed = run_placement(cfg, term.circuit);
      auto buf =
          qk::backend::qalloc(std::max({width, placed.min_width(), 1u}));
      acc += term.coefficient.real() * be->exp_val(placed, buf, cfg.shots);
    }
    nlohmann::json j;
    j["expectation"] = acc;
    j["shots"] = cfg.shots;
    std::cout << j.dump() << "\n";
    return 0;
  }

  const auto placed = run_placement(cfg, prepared.circuit);
  auto buf = qk::backend::qalloc(std::max({width, placed.min_width(), 1u}));
  be->execute(placed, buf, cfg.shots);
  if (buf.mitigated_probs) {
    nlohmann::json j = nlohmann::json::parse(qk::backend::counts_to_json(buf));
    j["mitigated_probs"] = nlohmann::json::object();
    for (const auto& [key, p] : *buf.mitigated_probs)
      j["mitigated_probs"][key] = p;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << qk::backend::counts_to_json(buf) << "\n";
  }
  return 0;
}

void add_shared_options(CLI::App* cmd, DriverConfig& cfg) {
  cmd->add_option("files", cfg.inputs, "kernel source files (.qk, .qasm, .quil)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--entry", cfg.entry, "entry kernel name");
  cmd->add_option("--args", cfg.args_text,
                  "comma-separated classical arguments; vectors as [a,b]");
  cmd->add_option("--qpu", cfg.qpu, "backend selector, e.g. sim or "
                                    "sim:noise-model=FILE (default sim)");
  cmd->add_option("--opt", cfg.opt, "optimization level 0|1 (default 0)");
  cmd->add_option("--opt-pass", cfg.opt_passes,
                  "run this pass (repeatable, ordered; overrides --opt)");
  cmd->add_option("--placement", cfg.placement, "placement strategy ssp|sabre");
  cmd->add_option("--coupling-graph", cfg.coupling_graph,
                  "builtin graph name or JSON file");
  cmd->add_option("--qubit-map", cfg.qubit_map,
                  "logical->physical map, comma-separated")
      ->delimiter(',');
  cmd->add_option("--seed", cfg.seed, "backend RNG seed");
  cmd->add_option("--qreg-size", cfg.qreg_size, "override register width");
}

}  // namespace

int main(int argc, char** argv) {
  DriverConfig cfg;
  CLI::App app{"quantum kernel compiler and runtime driver"};
  app.require_subcommand(1);

  auto* compile = app.add_subcommand("compile", "print the compiled circuit");
  add_shared_options(compile, cfg);
  compile->add_flag("--emit-pass-stats", cfg.emit_pass_stats,
                    "append per-pass statistics JSON");

  auto* run = app.add_subcommand("run", "execute and print results as JSON");
  add_shared_options(run, cfg);
  run->add_option("--shots", cfg.shots, "shot count (default 1024)");
  run->add_option("--qrt", cfg.qrt, "runtime mode nisq|ftqc (default nisq)");
  run->add_option("--em", cfg.mitigation,
                  "error mitigation strategy (repeatable; first is innermost)");
  run->add_option("--observable", cfg.observable,
                  "Pauli operator text; prints its expectation value");
  run->add_option("--inject-x", cfg.inject_x,
                  "ftqc test hook: X error on this qubit before streaming");

  auto* passes_cmd = app.add_subcommand("passes", "list optimization passes");
  auto* backends_cmd = app.add_subcommand("backends", "list backends");
  auto* placements_cmd =
      app.add_subcommand("placements", "list placement strategies");

  try {
    const auto args = rewrite_paper_flags(argc, argv);
    std::vector<const char*> argv2{argv[0]};
    for (const auto& a : args) argv2.push_back(a.c_str());
    app.parse(static_cast<int>(argv2.size()),
              const_cast<char**>(argv2.data()));

    if (passes_cmd->parsed()) {
      for (const auto& name : qk::passes::available_passes())
        std::cout << name << "\n";
      return 0;
    }
    if (backends_cmd->parsed()) {
      for (const auto& name : qk::backend::available_backends())
        std::cout << name << "\n";
      return 0;
    }
    if (placements_cmd->parsed()) {
      std::cout << "ssp\nsabre\n";
      return 0;
    }
    if (compile->parsed()) return cmd_compile(cfg);
    return cmd_run(cfg);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const qk::backend::TooManyQubits& e) {
    std::cerr << "qkc: resource error: " << e.what() << "\n";
    return 2;
  } catch (const qk::mitigation::TooManyQubitsForCalibration& e) {
    std::cerr << "qkc: resource error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qkc: error: " << e.what() << "\n";
    return 1;
  }
}
