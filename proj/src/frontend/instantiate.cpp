#include "qk/frontend/instantiate.hpp"

#include <cmath>
#include <cstdlib>
#include <map>

#include "qk/frontend/decompose.hpp"
#include "qk/frontend/registry.hpp"
#include "qk/ir/transforms.hpp"
#include "qk/ir/unitary.hpp"

namespace qk::frontend {

namespace {

constexpr int kMaxCallDepth = 128;
constexpr long long kMaxLoopIterations = 1 << 20;

struct RegBinding {
  std::string name;
  std::uint32_t offset;
  std::uint32_t size;
};

// Marker for a measurement result in NISQ mode: bound but unusable.
struct Poison {};

using Value = std::variant<long long, double, bool, RegBinding,
                           std::vector<long long>, std::vector<double>, Poison>;
using Env = std::map<std::string, Value>;

class Interp {
 public:
  Interp(const KernelRegistry& registry, ExecutionMode mode, LiveExecutor* live)
      : registry_(registry), mode_(mode), live_(live) {
    if (mode_ == ExecutionMode::ftqc && live_ == nullptr)
      throw InstantiationError("ftqc mode requires a live executor");
  }

  ir::Circuit run(const KernelDef& def, std::vector<Value> values) {
    ir::Circuit out(def.name);
    run_into(def, std::move(values), out);
    return out;
  }

  void run_into(const KernelDef& def, std::vector<Value> values,
                ir::Circuit& out) {
    if (++depth_ > kMaxCallDepth)
      throw InstantiationError("kernel call depth exceeded; recursive kernels?");
    Env env = bind(def, std::move(values));
    exec_block(def.body, env, out);
    --depth_;
  }

  std::vector<Value> lower_args(const KernelArgs& args) {
    std::vector<Value> values;
    std::uint32_t offset = 0;
    for (const auto& a : args) {
      if (const auto* qr = std::get_if<QregArg>(&a)) {
        if (qr->size == 0)
          throw ArgumentMismatch("register '" + qr->name + "' has size 0");
        values.push_back(RegBinding{qr->name, offset, qr->size});
        offset += qr->size;
      } else if (const auto* i = std::get_if<long long>(&a)) {
        values.push_back(*i);
      } else if (const auto* r = std::get_if<double>(&a)) {
        values.push_back(*r);
      } else if (const auto* vi = std::get_if<std::vector<long long>>(&a)) {
        values.push_back(*vi);
      } else {
        values.push_back(std::get<std::vector<double>>(a));
      }
    }
    return values;
  }

 private:
  const KernelRegistry& registry_;
  ExecutionMode mode_;
  LiveExecutor* live_;
  int depth_ = 0;

  // ---- argument binding ----

  Env bind(const KernelDef& def, std::vector<Value> values) {
    const auto& params = def.signature.params;
    if (params.size() != values.size())
      throw ArgumentMismatch("kernel '" + def.name + "' expects " +
                             std::to_string(params.size()) + " arguments, got " +
                             std::to_string(values.size()));
    Env env;
    for (std::size_t i = 0; i < params.size(); ++i) {
      Value& v = values[i];
      const KernelParam& p = params[i];
      bool ok = false;
      switch (p.type) {
        case ParamType::qreg:
          ok = std::holds_alternative<RegBinding>(v);
          break;
        case ParamType::real:
          if (std::holds_alternative<long long>(v))
            v = static_cast<double>(std::get<long long>(v));
          ok = std::holds_alternative<double>(v);
          break;
        case ParamType::integer:
          ok = std::holds_alternative<long long>(v);
          break;
        case ParamType::real_vector:
          ok = std::holds_alternative<std::vector<double>>(v);
          break;
        case ParamType::int_vector:
          ok = std::holds_alternative<std::vector<long long>>(v);
          break;
      }
      if (!ok)
        throw ArgumentMismatch("argument " + std::to_string(i + 1) +
                               " of kernel '" + def.name +
                               "' does not match parameter '" + p.name + "'");
      env[p.name] = std::move(v);
    }
    return env;
  }

  // ---- expression evaluation ----

  [[noreturn]] void poisoned() {
    throw MeasurementDependentBranchInNisqMode(
        "classical control flow cannot depend on a measurement result in NISQ "
        "mode");
  }

  long long as_int(const Value& v, SourcePos pos) {
    if (const auto* i = std::get_if<long long>(&v)) return *i;
    if (const auto* b = std::get_if<bool>(&v)) return *b ? 1 : 0;
    if (std::holds_alternative<Poison>(v)) poisoned();
    throw InstantiationError("line " + std::to_string(pos.line) +
                             ": expected an integer value");
  }

  double as_real(const Value& v, SourcePos pos) {
    if (const auto* r = std::get_if<double>(&v)) return *r;
    if (const auto* i = std::get_if<long long>(&v))
      return static_cast<double>(*i);
    if (std::holds_alternative<Poison>(v)) poisoned();
    throw InstantiationError("line " + std::to_string(pos.line) +
                             ": expected a numeric value");
  }

  bool as_bool(const Value& v, SourcePos pos) {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    if (const auto* i = std::get_if<long long>(&v)) return *i != 0;
    if (std::holds_alternative<Poison>(v)) poisoned();
    throw InstantiationError("line " + std::to_string(pos.line) +
                             ": condition must be integral");
  }

  Value eval(const ExprPtr& e, const Env& env) {
    switch (e->kind) {
      case Expr::Kind::int_lit:
        return e->int_value;
      case Expr::Kind::real_lit:
        return e->real_value;
      case Expr::Kind::ident: {
        auto it = env.find(e->name);
        if (it == env.end())
          throw InstantiationError("line " + std::to_string(e->pos.line) +
                                   ": unknown identifier '" + e->name + "'");
        if (std::holds_alternative<Poison>(it->second)) poisoned();
        return it->second;
      }
      case Expr::Kind::reg_size: {
        auto it = env.find(e->name);
        if (it == env.end())
          throw InstantiationError("line " + std::to_string(e->pos.line) +
                                   ": unknown identifier '" + e->name + "'");
        if (const auto* rb = std::get_if<RegBinding>(&it->second))
          return static_cast<long long>(rb->size);
        if (const auto* vi = std::get_if<std::vector<long long>>(&it->second))
          return static_cast<long long>(vi->size());
        if (const auto* vr = std::get_if<std::vector<double>>(&it->second))
          return static_cast<long long>(vr->size());
        throw InstantiationError("line " + std::to_string(e->pos.line) +
                                 ": '" + e->name + "' has no size()");
      }
      case Expr::Kind::vec_index: {
        auto it = env.find(e->name);
        if (it == env.end())
          throw InstantiationError("line " + std::to_string(e->pos.line) +
                                   ": unknown identifier '" + e->name + "'");
        if (std::holds_alternative<RegBinding>(it->second))
          throw InstantiationError(
              "line " + std::to_string(e->pos.line) +
              ": a qubit reference cannot be used as a classical value");
        long long idx = as_int(eval(e->rhs, env), e->pos);
        if (const auto* vi = std::get_if<std::vector<long long>>(&it->second)) {
          if (idx < 0 || idx >= static_cast<long long>(vi->size()))
            throw RangeError("line " + std::to_string(e->pos.line) + ": index " +
                             std::to_string(idx) + " out of range for '" +
                             e->name + "'");
          return (*vi)[static_cast<std::size_t>(idx)];
        }
        if (const auto* vr = std::get_if<std::vector<double>>(&it->second)) {
          if (idx < 0 || idx >= static_cast<long long>(vr->size()))
            throw RangeError("line " + std::to_string(e->pos.line) + ": index " +
                             std::to_string(idx) + " out of range for '" +
                             e->name + "'");
          return (*vr)[static_cast<std::size_t>(idx)];
        }
        throw InstantiationError("line " + std::to_string(e->pos.line) + ": '" +
                                 e->name + "' is not indexable");
      }
      case Expr::Kind::unary: {
        Value v = eval(e->rhs, env);
        if (e->op == "!") return !as_bool(v, e->pos);
        if (std::holds_alternative<double>(v)) return -std::get<double>(v);
        return -as_int(v, e->pos);
      }
      case Expr::Kind::binary:
        return eval_binary(e, env);
    }
    throw InstantiationError("unreachable expression kind");
  }

  Value eval_binary(const ExprPtr& e, const Env& env) {
    const std::string& op = e->op;
    Value lv = eval(e->lhs, env);
    Value rv = eval(e->rhs, env);
    SourcePos pos = e->pos;

    if (op == "&&") return as_bool(lv, pos) && as_bool(rv, pos);
    if (op == "||") return as_bool(lv, pos) || as_bool(rv, pos);

    bool real_op = std::holds_alternative<double>(lv) ||
                   std::holds_alternative<double>(rv);
    if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" ||
        op == ">=") {
      if (real_op) {
        double a = as_real(lv, pos), b = as_real(rv, pos);
        if (op == "==") return a == b;
        if (op == "!=") return a != b;
        if (op == "<") return a < b;
        if (op == "<=") return a <= b;
        if (op == ">") return a > b;
        return a >= b;
      }
      long long a = as_int(lv, pos), b = as_int(rv, pos);
      if (op == "==") return a == b;
      if (op == "!=") return a != b;
      if (op == "<") return a < b;
      if (op == "<=") return a <= b;
      if (op == ">") return a > b;
      return a >= b;
    }

    if (op == "%" || op == "<<" || op == ">>") {
      long long a = as_int(lv, pos), b = as_int(rv, pos);
      if (op == "%") {
        if (b == 0)
          throw InstantiationError("line " + std::to_string(pos.line) +
                                   ": modulo by zero");
        return a % b;
      }
      if (b < 0 || b > 62)
        throw InstantiationError("line " + std::to_string(pos.line) +
                                 ": shift amount out of range");
      return op == "<<" ? (a << b) : (a >> b);
    }

    if (real_op) {
      double a = as_real(lv, pos), b = as_real(rv, pos);
      if (op == "+") return a + b;
      if (op == "-") return a - b;
      if (op == "*") return a * b;
      if (op == "/") return a / b;
    } else {
      long long a = as_int(lv, pos), b = as_int(rv, pos);
      if (op == "+") return a + b;
      if (op == "-") return a - b;
      if (op == "*") return a * b;
      if (op == "/") {
        if (b == 0)
          throw InstantiationError("line " + std::to_string(pos.line) +
                                   ": division by zero");
        return a / b;
      }
    }
    throw InstantiationError("unknown operator '" + op + "'");
  }

  // ---- operand resolution ----

  const RegBinding& reg_of(const std::string& name, const Env& env,
                           SourcePos pos) {
    auto it = env.find(name);
    if (it == env.end() || !std::holds_alternative<RegBinding>(it->second))
      throw InstantiationError("line " + std::to_string(pos.line) +
                               ": unknown quantum register '" + name + "'");
    return std::get<RegBinding>(it->second);
  }

  std::uint32_t resolve_qubit(const QubitExpr& q, const Env& env) {
    const RegBinding& rb = reg_of(q.reg, env, q.pos);
    if (!q.index)
      throw InstantiationError("line " + std::to_string(q.pos.line) +
                               ": bare register not allowed here");
    long long idx = as_int(eval(q.index, env), q.pos);
    if (idx < 0 || idx >= static_cast<long long>(rb.size))
      throw RangeError("line " + std::to_string(q.pos.line) + ": qubit index " +
                       std::to_string(idx) + " out of range for register '" +
                       q.reg + "' of size " + std::to_string(rb.size));
    return rb.offset + static_cast<std::uint32_t>(idx);
  }

  // ---- emission ----

  // Plain instructions go through apply() whole, Measure included, so the
  // executor keeps the classical slot. measure() is reserved for LetBit,
  // where the interpreter itself consumes the result.
  void stream(const ir::Instruction& inst) {
    if (mode_ != ExecutionMode::ftqc) return;
    live_->apply(inst);
  }

  void emit(ir::Circuit& out, ir::Instruction inst) {
    stream(inst);
    out.add(std::move(inst));
  }

  // ---- statements ----

  void exec_block(const std::vector<StmtPtr>& stmts, Env& env,
                  ir::Circuit& out) {
    for (const auto& s : stmts) exec_stmt(*s, env, out);
  }

  void exec_stmt(const Stmt& stmt, Env& env, ir::Circuit& out) {
    std::visit([&](const auto& node) { exec_node(node, stmt.pos, env, out); },
               stmt.node);
  }

  void exec_node(const GateCall& g, SourcePos pos, Env& env, ir::Circuit& out) {
    std::vector<double> params;
    for (const auto& p : g.params) params.push_back(as_real(eval(p, env), pos));

    bool broadcast = !g.qubits.empty() && g.qubits[0].index == nullptr;
    if (broadcast && g.qubits.size() != 1)
      throw InstantiationError("line " + std::to_string(pos.line) +
                               ": broadcast requires a single operand");
    if (g.kind == ir::GateKind::Measure) {
      const RegBinding* rb =
          broadcast ? &reg_of(g.qubits[0].reg, env, pos) : nullptr;
      std::uint32_t count = broadcast ? rb->size : 1;
      for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t q = broadcast ? rb->offset + i
                                    : resolve_qubit(g.qubits[0], env);
        std::uint32_t slot = q;
        if (g.slot) {
          long long base = as_int(eval(g.slot, env), pos);
          slot = static_cast<std::uint32_t>(base) + (broadcast ? i : 0);
        }
        emit(out, ir::measure(q, slot));
      }
      return;
    }
    if (broadcast) {
      const RegBinding& rb = reg_of(g.qubits[0].reg, env, pos);
      for (std::uint32_t i = 0; i < rb.size; ++i) {
        std::uint32_t q = rb.offset + i;
        emit(out, ir::Instruction(g.kind, {ir::QubitRef{q}}, params));
      }
      return;
    }
    std::vector<ir::QubitRef> qubits;
    for (const auto& qe : g.qubits)
      qubits.push_back(ir::QubitRef{resolve_qubit(qe, env)});
    emit(out, ir::Instruction(g.kind, std::move(qubits), std::move(params)));
  }

  void exec_node(const ToffoliCall& t, SourcePos pos, Env& env,
                 ir::Circuit& out) {
    (void)pos;
    std::uint32_t a = resolve_qubit(t.a, env);
    std::uint32_t b = resolve_qubit(t.b, env);
    std::uint32_t c = resolve_qubit(t.target, env);
    auto seq = ir::multi_controlled(ir::gate(ir::GateKind::X, c),
                                    {ir::QubitRef{a}, ir::QubitRef{b}},
                                    {true, true});
    for (auto& inst : seq) emit(out, std::move(inst));
  }

  void exec_node(const KernelCall& call, SourcePos pos, Env& env,
                 ir::Circuit& out) {
    const KernelDef* def = registry_.find(call.callee);
    if (!def)
      throw UnresolvedKernel("line " + std::to_string(pos.line) +
                             ": unknown kernel '" + call.callee + "'");
    std::vector<Value> values;
    for (const auto& a : call.args) values.push_back(eval_arg(a, env));

    if (call.mode == CallMode::plain) {
      ir::Circuit sub(def->name);
      run_into(*def, std::move(values), sub);
      out.add(std::move(sub));
      return;
    }

    // adjoint/ctrl: build the callee purely, then transform. Streaming of
    // the transformed gates happens here, not during the nested build.
    ExecutionMode saved_mode = mode_;
    LiveExecutor* saved_live = live_;
    mode_ = ExecutionMode::nisq;
    live_ = nullptr;
    ir::Circuit sub(def->name);
    try {
      run_into(*def, values, sub);
    } catch (...) {
      mode_ = saved_mode;
      live_ = saved_live;
      throw;
    }
    mode_ = saved_mode;
    live_ = saved_live;

    ir::Circuit transformed =
        call.mode == CallMode::adjoint
            ? ir::adjoint(sub)
            : ir::controlled(sub,
                             ir::QubitRef{resolve_ctrl(call, values, env, pos)});
    if (mode_ == ExecutionMode::ftqc)
      for (const auto& inst : transformed.flatten()) stream(inst);
    out.add(std::move(transformed));
  }

  // The ctrl argument is either an explicit q[i] or an integer index into
  // the first qreg argument of the call.
  std::uint32_t resolve_ctrl(const KernelCall& call,
                             const std::vector<Value>& arg_values, const Env& env,
                             SourcePos pos) {
    const ExprPtr& ce = call.ctrl_index;
    if (!ce)
      throw InstantiationError("line " + std::to_string(pos.line) +
                               ": ctrl requires a control argument");
    if (ce->kind == Expr::Kind::vec_index) {
      auto it = env.find(ce->name);
      if (it != env.end() && std::holds_alternative<RegBinding>(it->second))
        return resolve_qubit(QubitExpr{ce->name, ce->rhs, ce->pos}, env);
    }
    long long k = as_int(eval(ce, env), pos);
    for (const auto& v : arg_values) {
      if (const auto* rb = std::get_if<RegBinding>(&v)) {
        if (k < 0 || k >= static_cast<long long>(rb->size))
          throw RangeError("line " + std::to_string(pos.line) +
                           ": ctrl index " + std::to_string(k) +
                           " out of range for register '" + rb->name + "'");
        return rb->offset + static_cast<std::uint32_t>(k);
      }
    }
    throw InstantiationError("line " + std::to_string(pos.line) +
                             ": ctrl by index requires a qreg argument");
  }

  Value eval_arg(const ExprPtr& a, const Env& env) {
    if (a->kind == Expr::Kind::ident) {
      auto it = env.find(a->name);
      if (it != env.end() && std::holds_alternative<RegBinding>(it->second))
        return it->second;
    }
    if (a->kind == Expr::Kind::vec_index) {
      auto it = env.find(a->name);
      if (it != env.end() && std::holds_alternative<RegBinding>(it->second))
        throw InstantiationError(
            "line " + std::to_string(a->pos.line) +
            ": a single qubit cannot be passed as a kernel argument");
    }
    return eval(a, env);
  }

  void exec_node(const ForStmt& f, SourcePos pos, Env& env, ir::Circuit& out) {
    long long i = as_int(eval(f.init, env), pos);
    long long bound = as_int(eval(f.bound, env), pos);
    auto keep_going = [&](long long v) {
      if (f.cmp == "<") return v < bound;
      if (f.cmp == "<=") return v <= bound;
      if (f.cmp == ">") return v > bound;
      if (f.cmp == ">=") return v >= bound;
      return v != bound;
    };
    long long iterations = 0;
    for (; keep_going(i); i += f.step) {
      if (++iterations > kMaxLoopIterations)
        throw InstantiationError("line " + std::to_string(pos.line) +
                                 ": loop iteration limit exceeded");
      Env child = env;
      child[f.var] = i;
      exec_block(f.body, child, out);
    }
  }

  void exec_node(const IfStmt& s, SourcePos pos, Env& env, ir::Circuit& out) {
    bool cond = as_bool(eval(s.cond, env), pos);
    Env child = env;
    exec_block(cond ? s.then_body : s.else_body, child, out);
  }

  void exec_node(const LetVal& l, SourcePos pos, Env& env, ir::Circuit& out) {
    (void)pos;
    (void)out;
    env[l.var] = eval(l.value, env);
  }

  void exec_node(const LetBit& l, SourcePos pos, Env& env, ir::Circuit& out) {
    (void)pos;
    std::uint32_t q = resolve_qubit(l.target, env);
    if (mode_ == ExecutionMode::ftqc) {
      int bit = live_->measure(q);
      out.add(ir::measure(q, q));
      env[l.var] = bit != 0;
    } else {
      out.add(ir::measure(q, q));
      env[l.var] = Poison{};
    }
  }

  void exec_node(const DecomposeStmt& d, SourcePos pos, Env& env,
                 ir::Circuit& out) {
    double tol = 1e-8;
    auto topt = d.options.find("tolerance");
    if (topt != d.options.end()) {
      char* end = nullptr;
      tol = std::strtod(topt->second.c_str(), &end);
      if (end == topt->second.c_str() || tol <= 0)
        throw InstantiationError("line " + std::to_string(pos.line) +
                                 ": bad tolerance '" + topt->second + "'");
    }
    // Only the Givens method ships; a method option is accepted as a hint
    // and other keys are ignored.

    long long dim = as_int(eval(d.program.dim, env), pos);
    if (dim < 2 || dim > 8 || (dim & (dim - 1)) != 0)
      throw DimensionMismatch("line " + std::to_string(pos.line) +
                              ": matrix dimension must be 2, 4, or 8");
    int n = 0;
    while ((1 << n) < dim) ++n;

    const RegBinding& rb = reg_of(d.reg, env, pos);
    if (static_cast<long long>(1) << rb.size != dim)
      throw DimensionMismatch("line " + std::to_string(pos.line) +
                              ": matrix dimension " + std::to_string(dim) +
                              " does not match register '" + d.reg +
                              "' of size " + std::to_string(rb.size));

    ir::UnitaryMatrix u = ir::UnitaryMatrix::Zero(dim, dim);
    if (d.program.identity_init) u.setIdentity();
    for (const auto& a : d.program.assigns) {
      long long r = as_int(eval(a.row, env), pos);
      long long c = as_int(eval(a.col, env), pos);
      if (r < 0 || r >= dim || c < 0 || c >= dim)
        throw RangeError("line " + std::to_string(pos.line) +
                         ": matrix index out of range");
      u(r, c) = as_real(eval(a.value, env), pos);
    }

    // The block writes the matrix in ket-label order (qubit 0 is the most
    // significant bit of a row index); internal indexing is little-endian.
    auto insts = decompose_unitary(bit_reverse_unitary(u), tol);
    ir::Circuit sub("decompose_" + d.program.var);
    for (const auto& inst : insts) {
      std::vector<ir::QubitRef> qubits;
      for (const auto& q : inst.qubits())
        qubits.push_back(ir::QubitRef{q.index + rb.offset});
      sub.add(ir::Instruction(inst.kind(), std::move(qubits), inst.params()));
    }
    if (mode_ == ExecutionMode::ftqc)
      for (const auto& inst : sub.flatten()) stream(inst);
    out.add(std::move(sub));
  }
};

}  // namespace

ir::Circuit instantiate(const KernelRegistry& registry,
                        const std::string& kernel, const KernelArgs& args,
                        const InstantiateOptions& opts) {
  const KernelDef* def = registry.find(kernel);
  if (!def) throw UnresolvedKernel("unknown kernel '" + kernel + "'");
  Interp interp(registry, opts.mode, opts.live);
  return interp.run(*def, interp.lower_args(args));
}

void instantiate(const KernelRegistry& registry, const std::string& kernel,
                 const KernelArgs& args, ir::Circuit& parent,
                 const InstantiateOptions& opts) {
  parent.add(instantiate(registry, kernel, args, opts));
}

}  // namespace qk::frontend
