#include "qk/frontend/parser.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "qk/frontend/lexer.hpp"

namespace qk::frontend {

namespace {

constexpr int kMaxExprDepth = 200;
constexpr int kMaxBlockDepth = 64;
constexpr int kMaxIncludeDepth = 16;

// Per-kernel OpenQASM context: register aliases and classical offsets.
struct QasmState {
  std::map<std::string, std::string> qreg_alias;
  std::map<std::string, std::pair<std::uint32_t, std::uint32_t>> cregs;
  std::uint32_t next_creg_offset = 0;
  int next_qreg_binding = 0;
};

struct QasmGate {
  ir::GateKind kind;
  bool u2 = false;       // u2(phi,lambda) -> U3(pi/2,phi,lambda)
  bool identity = false; // id: parse and drop
  bool toffoli = false;  // ccx
};

const std::map<std::string, QasmGate>& qasm_gate_map() {
  using K = ir::GateKind;
  static const std::map<std::string, QasmGate> m = {
      {"x", {K::X}},         {"y", {K::Y}},       {"z", {K::Z}},
      {"h", {K::H}},         {"s", {K::S}},       {"sdg", {K::Sdg}},
      {"t", {K::T}},         {"tdg", {K::Tdg}},   {"rx", {K::Rx}},
      {"ry", {K::Ry}},       {"rz", {K::Rz}},     {"u1", {K::U1}},
      {"u3", {K::U3}},       {"U", {K::U3}},      {"u2", {K::U3, true}},
      {"cx", {K::CX}},       {"CX", {K::CX}},     {"cy", {K::CY}},
      {"cz", {K::CZ}},       {"ch", {K::CH}},     {"crz", {K::CRz}},
      {"cu1", {K::CPhase}},  {"swap", {K::Swap}},
      {"id", {K::X, false, true}},
      {"ccx", {K::X, false, false, true}},
  };
  return m;
}

struct QuilGate {
  ir::GateKind kind;
  bool toffoli = false;
};

const std::map<std::string, QuilGate>& quil_gate_map() {
  using K = ir::GateKind;
  static const std::map<std::string, QuilGate> m = {
      {"X", {K::X}},        {"Y", {K::Y}},    {"Z", {K::Z}},
      {"H", {K::H}},        {"S", {K::S}},    {"T", {K::T}},
      {"RX", {K::Rx}},      {"RY", {K::Ry}},  {"RZ", {K::Rz}},
      {"PHASE", {K::U1}},   {"CZ", {K::CZ}},  {"CNOT", {K::CX}},
      {"SWAP", {K::Swap}},  {"CPHASE", {K::CPhase}},
      {"CCNOT", {K::X, true}},
  };
  return m;
}

bool is_quil_unsupported(const std::string& s) {
  static const std::set<std::string> kNames = {
      "DECLARE", "DEFGATE",  "DEFCIRCUIT", "LABEL",     "JUMP",
      "PRAGMA",  "HALT",     "WAIT",       "CSWAP",     "ISWAP",
      "XY",      "PSWAP",    "DAGGER",     "CONTROLLED", "FORKED",
      "CPHASE00", "CPHASE01", "CPHASE10",  "JUMP-WHEN", "JUMP-UNLESS",
  };
  return kNames.count(s) > 0;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<KernelDef> translation_unit() {
    std::vector<KernelDef> out;
    skip_nl();
    while (!at_end()) {
      out.push_back(kernel());
      skip_nl();
    }
    if (out.empty())
      throw SyntaxError("no __qpu__ kernel found", cur().pos);
    return out;
  }

  KernelDef qasm_standalone(const std::string& name) {
    KernelDef k;
    k.name = name;
    QasmState qs;
    k.language_trace.push_back({SourceLanguage::openqasm, 1, 0});
    while (true) {
      skip_nl();
      if (at_end()) break;
      qasm_stmt(k, qs, /*standalone=*/true);
    }
    if (k.signature.params.empty())
      throw SyntaxError("OpenQASM source declares no qreg", cur().pos);
    k.language_trace.back().last_line = cur().pos.line;
    return k;
  }

  KernelDef quil_standalone(const std::string& name) {
    KernelDef k;
    k.name = name;
    k.signature.params.push_back({ParamType::qreg, "q"});
    k.language_trace.push_back({SourceLanguage::quil, 1, 0});
    while (true) {
      skip_nl();
      if (at_end()) break;
      quil_line(k, "q");
    }
    k.declared_qreg_size =
        static_cast<std::uint32_t>(quil_max_qubit_ < 0 ? 1 : quil_max_qubit_ + 1);
    k.language_trace.back().last_line = cur().pos.line;
    return k;
  }

 private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  int block_depth_ = 0;
  int quil_max_qubit_ = -1;

  // ---- token helpers ----

  const Token& cur() const { return toks_[i_]; }
  const Token& peek(std::size_t k) const {
    std::size_t j = i_ + k;
    return toks_[j < toks_.size() ? j : toks_.size() - 1];
  }
  bool at_end() const { return cur().kind == Token::Kind::end; }
  void advance() {
    if (i_ + 1 < toks_.size()) ++i_;
  }
  void skip_nl() {
    while (cur().kind == Token::Kind::newline) advance();
  }
  // Next non-newline token, for lookahead across line breaks.
  const Token& peek_solid(std::size_t k) const {
    std::size_t j = i_, seen = 0;
    while (j < toks_.size()) {
      if (toks_[j].kind != Token::Kind::newline) {
        if (seen == k) return toks_[j];
        ++seen;
      }
      ++j;
    }
    return toks_.back();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg, cur().pos);
  }

  void expect_sym(const char* s) {
    skip_nl();
    if (!cur().is_sym(s)) fail(std::string("expected '") + s + "'");
    advance();
  }
  bool accept_sym(const char* s) {
    skip_nl();
    if (!cur().is_sym(s)) return false;
    advance();
    return true;
  }
  std::string expect_ident(const char* what = "identifier") {
    skip_nl();
    if (cur().kind != Token::Kind::ident) fail(std::string("expected ") + what);
    std::string s = cur().text;
    advance();
    return s;
  }
  void expect_keyword(const char* kw) {
    skip_nl();
    if (!cur().is_ident(kw)) fail(std::string("expected '") + kw + "'");
    advance();
  }
  long long expect_int() {
    skip_nl();
    if (cur().kind != Token::Kind::int_lit) fail("expected integer literal");
    long long v = cur().int_value;
    advance();
    return v;
  }

  // ---- expressions ----

  ExprPtr expr(int depth = 0) { return expr_or(depth); }

  ExprPtr binary_chain(int depth, ExprPtr (Parser::*next)(int),
                       std::initializer_list<const char*> ops) {
    if (depth > kMaxExprDepth) fail("expression too deeply nested");
    ExprPtr lhs = (this->*next)(depth + 1);
    while (true) {
      skip_nl();
      const char* hit = nullptr;
      for (const char* op : ops)
        if (cur().is_sym(op)) {
          hit = op;
          break;
        }
      if (!hit) return lhs;
      SourcePos pos = cur().pos;
      advance();
      ExprPtr rhs = (this->*next)(depth + 1);
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::binary;
      e->op = hit;
      e->lhs = lhs;
      e->rhs = rhs;
      e->pos = pos;
      lhs = e;
    }
  }

  ExprPtr expr_or(int d) { return binary_chain(d, &Parser::expr_and, {"||"}); }
  ExprPtr expr_and(int d) { return binary_chain(d, &Parser::expr_eq, {"&&"}); }
  ExprPtr expr_eq(int d) { return binary_chain(d, &Parser::expr_rel, {"==", "!="}); }
  ExprPtr expr_rel(int d) {
    return binary_chain(d, &Parser::expr_shift, {"<=", ">=", "<", ">"});
  }
  ExprPtr expr_shift(int d) { return binary_chain(d, &Parser::expr_add, {"<<", ">>"}); }
  ExprPtr expr_add(int d) { return binary_chain(d, &Parser::expr_mul, {"+", "-"}); }
  ExprPtr expr_mul(int d) {
    return binary_chain(d, &Parser::expr_unary, {"*", "/", "%"});
  }

  ExprPtr expr_unary(int depth) {
    if (depth > kMaxExprDepth) fail("expression too deeply nested");
    skip_nl();
    if (cur().is_sym("-") || cur().is_sym("!") || cur().is_sym("+")) {
      std::string op = cur().text;
      SourcePos pos = cur().pos;
      advance();
      ExprPtr operand = expr_unary(depth + 1);
      if (op == "+") return operand;
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::unary;
      e->op = op;
      e->rhs = operand;
      e->pos = pos;
      return e;
    }
    return expr_primary(depth);
  }

  ExprPtr expr_primary(int depth) {
    if (depth > kMaxExprDepth) fail("expression too deeply nested");
    skip_nl();
    const Token& t = cur();
    if (t.kind == Token::Kind::int_lit) {
      advance();
      return make_int(t.int_value, t.pos);
    }
    if (t.kind == Token::Kind::real_lit) {
      advance();
      return make_real(t.real_value, t.pos);
    }
    if (t.is_sym("(")) {
      advance();
      ExprPtr e = expr(depth + 1);
      expect_sym(")");
      return e;
    }
    if (t.kind == Token::Kind::ident) {
      std::string name = t.text;
      SourcePos pos = t.pos;
      advance();
      if (name == "pi" || name == "PI") return make_real(M_PI, pos);
      if (accept_sym("[")) {
        ExprPtr idx = expr(depth + 1);
        expect_sym("]");
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::vec_index;
        e->name = name;
        e->rhs = idx;
        e->pos = pos;
        return e;
      }
      if (cur().is_sym(".")) {
        advance();
        expect_keyword("size");
        expect_sym("(");
        expect_sym(")");
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::reg_size;
        e->name = name;
        e->pos = pos;
        return e;
      }
      if (cur().is_sym("(")) {
        if (name == "Measure")
          fail("Measure is only allowed as a statement or bool initializer");
        fail("function calls are not allowed in expressions");
      }
      return make_ident(name, pos);
    }
    fail("expected expression");
  }

  QubitExpr to_qubit(const ExprPtr& e) {
    if (e->kind != Expr::Kind::vec_index)
      throw SyntaxError("expected a qubit operand of the form reg[index]", e->pos);
    return QubitExpr{e->name, e->rhs, e->pos};
  }

  // ---- kernel structure ----

  KernelDef kernel() {
    expect_keyword("__qpu__");
    expect_keyword("void");
    KernelDef k;
    k.name = expect_ident("kernel name");
    expect_sym("(");
    if (!accept_sym(")")) {
      while (true) {
        k.signature.params.push_back(param());
        if (accept_sym(")")) break;
        expect_sym(",");
      }
    }
    expect_sym("{");
    body(k);
    expect_sym("}");
    return k;
  }

  KernelParam param() {
    skip_nl();
    std::string head = expect_ident("parameter type");
    if (head == "const") head = expect_ident("parameter type");
    ParamType type;
    if (head == "qreg") {
      type = ParamType::qreg;
    } else if (head == "double" || head == "float" || head == "real") {
      type = ParamType::real;
    } else if (head == "int" || head == "long") {
      type = ParamType::integer;
    } else if (head == "std" || head == "vector") {
      if (head == "std") {
        expect_sym("::");
        expect_keyword("vector");
      }
      expect_sym("<");
      std::string elem = expect_ident("element type");
      if (elem == "double" || elem == "float")
        type = ParamType::real_vector;
      else if (elem == "int" || elem == "long")
        type = ParamType::int_vector;
      else
        fail("unsupported vector element type '" + elem + "'");
      expect_sym(">");
    } else {
      fail("unsupported parameter type '" + head + "'");
    }
    accept_sym("&");
    std::string name = expect_ident("parameter name");
    return {type, name};
  }

  void body(KernelDef& k) {
    SourceLanguage lang = SourceLanguage::xasm;
    QasmState qs;
    skip_nl();
    k.language_trace.push_back({lang, cur().pos.line, cur().pos.line});
    while (true) {
      skip_nl();
      if (cur().is_sym("}") || at_end()) break;
      if (cur().is_ident("using")) {
        k.language_trace.back().last_line = cur().pos.line;
        lang = language_directive();
        skip_nl();
        k.language_trace.push_back({lang, cur().pos.line, cur().pos.line});
        continue;
      }
      switch (lang) {
        case SourceLanguage::xasm:
          k.body.push_back(xasm_stmt());
          break;
        case SourceLanguage::openqasm:
          qasm_stmt(k, qs, /*standalone=*/false);
          break;
        case SourceLanguage::quil: {
          std::string reg = first_qreg_name(k);
          quil_line(k, reg);
          break;
        }
      }
      k.language_trace.back().last_line = cur().pos.line;
    }
  }

  std::string first_qreg_name(const KernelDef& k) {
    for (const auto& p : k.signature.params)
      if (p.type == ParamType::qreg) return p.name;
    fail("Quil statements require a qreg parameter");
  }

  SourceLanguage language_directive() {
    expect_keyword("using");
    std::string ns = expect_ident("qk or qcor");
    if (ns != "qk" && ns != "qcor")
      fail("expected qk::<language> or qcor::<language>");
    expect_sym("::");
    std::string lang = expect_ident("language name");
    expect_sym(";");
    if (lang == "xasm") return SourceLanguage::xasm;
    if (lang == "openqasm" || lang == "qasm") return SourceLanguage::openqasm;
    if (lang == "quil") return SourceLanguage::quil;
    fail("unknown language '" + lang + "'");
  }

  // ---- XASM statements ----

  StmtPtr xasm_stmt() {
    skip_nl();
    SourcePos pos = cur().pos;
    if (cur().kind != Token::Kind::ident) fail("expected statement");
    const std::string& head = cur().text;
    if (head == "for") return for_stmt();
    if (head == "if") return if_stmt();
    if (head == "decompose") return decompose_stmt();
    if (head == "const" || head == "int" || head == "auto" || head == "double" ||
        head == "float" || head == "bool" || head == "long")
      return decl_stmt();
    if (head == "using")
      fail("language switch is only allowed at kernel top level");

    std::string name = expect_ident();
    if (accept_sym("::")) {
      std::string mode = expect_ident("adjoint or ctrl");
      KernelCall call;
      call.callee = name;
      if (mode == "adjoint") {
        call.mode = CallMode::adjoint;
      } else if (mode == "ctrl") {
        call.mode = CallMode::ctrl;
      } else {
        fail("expected adjoint or ctrl after '::'");
      }
      expect_sym("(");
      std::vector<ExprPtr> args = call_args();
      if (call.mode == CallMode::ctrl) {
        if (args.empty()) fail("ctrl requires a control argument");
        call.ctrl_index = args.front();
        args.erase(args.begin());
      }
      call.args = std::move(args);
      expect_sym(";");
      return make_stmt(std::move(call), pos);
    }

    expect_sym("(");
    std::vector<ExprPtr> args = call_args();
    expect_sym(";");

    if (auto kind = ir::gate_from_name(name)) {
      GateCall g;
      g.kind = *kind;
      std::size_t arity = ir::gate_arity(*kind);
      std::size_t nparams = ir::gate_param_count(*kind);
      if (args.size() != arity + nparams)
        throw SyntaxError(name + " expects " + std::to_string(arity + nparams) +
                              " arguments, got " + std::to_string(args.size()),
                          pos);
      for (std::size_t i = 0; i < arity; ++i) g.qubits.push_back(to_qubit(args[i]));
      for (std::size_t i = arity; i < args.size(); ++i) g.params.push_back(args[i]);
      return make_stmt(std::move(g), pos);
    }
    KernelCall call;
    call.callee = name;
    call.args = std::move(args);
    return make_stmt(std::move(call), pos);
  }

  std::vector<ExprPtr> call_args() {
    std::vector<ExprPtr> args;
    if (accept_sym(")")) return args;
    while (true) {
      args.push_back(expr());
      if (accept_sym(")")) break;
      expect_sym(",");
    }
    return args;
  }

  StmtPtr for_stmt() {
    SourcePos pos = cur().pos;
    expect_keyword("for");
    expect_sym("(");
    skip_nl();
    if (cur().is_ident("int") || cur().is_ident("auto") || cur().is_ident("long") ||
        cur().is_ident("const"))
      advance();
    ForStmt f;
    f.var = expect_ident("loop variable");
    expect_sym("=");
    f.init = expr();
    expect_sym(";");
    std::string v = expect_ident("loop variable");
    if (v != f.var) fail("loop condition must test the loop variable");
    skip_nl();
    if (cur().is_sym("<") || cur().is_sym("<=") || cur().is_sym(">") ||
        cur().is_sym(">=") || cur().is_sym("!=")) {
      f.cmp = cur().text;
      advance();
    } else {
      fail("expected a comparison in the loop condition");
    }
    f.bound = expr();
    expect_sym(";");
    skip_nl();
    if (cur().is_sym("++") || cur().is_sym("--")) {
      f.step = cur().is_sym("++") ? 1 : -1;
      advance();
      std::string sv = expect_ident("loop variable");
      if (sv != f.var) fail("loop step must update the loop variable");
    } else {
      std::string sv = expect_ident("loop variable");
      if (sv != f.var) fail("loop step must update the loop variable");
      skip_nl();
      if (cur().is_sym("++"))
        f.step = 1;
      else if (cur().is_sym("--"))
        f.step = -1;
      else
        fail("expected ++ or -- in the loop step");
      advance();
    }
    expect_sym(")");
    f.body = block_or_single();
    return make_stmt(std::move(f), pos);
  }

  StmtPtr if_stmt() {
    SourcePos pos = cur().pos;
    expect_keyword("if");
    expect_sym("(");
    IfStmt s;
    s.cond = expr();
    expect_sym(")");
    s.then_body = block_or_single();
    skip_nl();
    if (cur().is_ident("else")) {
      advance();
      s.else_body = block_or_single();
    }
    return make_stmt(std::move(s), pos);
  }

  std::vector<StmtPtr> block_or_single() {
    if (++block_depth_ > kMaxBlockDepth) fail("blocks nested too deeply");
    std::vector<StmtPtr> out;
    if (accept_sym("{")) {
      while (true) {
        skip_nl();
        if (cur().is_sym("}")) {
          advance();
          break;
        }
        if (at_end()) fail("unterminated block");
        out.push_back(xasm_stmt());
      }
    } else {
      out.push_back(xasm_stmt());
    }
    --block_depth_;
    return out;
  }

  StmtPtr decl_stmt() {
    SourcePos pos = cur().pos;
    std::string head = expect_ident();
    if (head == "const") head = expect_ident("declaration type");
    if (head != "int" && head != "auto" && head != "double" && head != "float" &&
        head != "bool" && head != "long")
      fail("unsupported declaration type '" + head + "'");
    std::string name = expect_ident("variable name");
    expect_sym("=");
    skip_nl();
    if (cur().is_ident("Measure") && peek_solid(1).is_sym("(")) {
      advance();
      expect_sym("(");
      LetBit lb;
      lb.var = name;
      lb.target = to_qubit(expr());
      expect_sym(")");
      expect_sym(";");
      return make_stmt(std::move(lb), pos);
    }
    LetVal lv;
    lv.var = name;
    lv.value = expr();
    expect_sym(";");
    return make_stmt(std::move(lv), pos);
  }

  StmtPtr decompose_stmt() {
    SourcePos pos = cur().pos;
    expect_keyword("decompose");
    expect_sym("{");
    DecomposeStmt d;
    expect_keyword("UnitaryMatrix");
    d.program.var = expect_ident("matrix name");
    expect_sym("=");
    expect_keyword("UnitaryMatrix");
    expect_sym("::");
    std::string init = expect_ident("Identity or Zero");
    if (init == "Identity")
      d.program.identity_init = true;
    else if (init == "Zero")
      d.program.identity_init = false;
    else
      fail("expected Identity or Zero");
    expect_sym("(");
    d.program.dim = expr();
    expect_sym(",");
    ExprPtr dim2 = expr();
    (void)dim2;  // square by construction; the second extent is ignored
    expect_sym(")");
    expect_sym(";");
    while (true) {
      skip_nl();
      if (accept_sym("}")) break;
      std::string name = expect_ident("matrix name");
      if (name != d.program.var)
        fail("assignment to undeclared matrix '" + name + "'");
      MatrixProgram::Assign a;
      expect_sym("(");
      a.row = expr();
      expect_sym(",");
      a.col = expr();
      expect_sym(")");
      expect_sym("=");
      a.value = expr();
      expect_sym(";");
      d.program.assigns.push_back(std::move(a));
    }
    expect_sym("(");
    d.reg = expect_ident("register name");
    if (accept_sym(",")) {
      expect_sym("{");
      while (true) {
        expect_sym("{");
        std::string key = option_string();
        expect_sym(",");
        std::string value = option_string();
        expect_sym("}");
        d.options[key] = value;
        if (accept_sym("}")) break;
        expect_sym(",");
      }
    }
    expect_sym(")");
    expect_sym(";");
    return make_stmt(std::move(d), pos);
  }

  std::string option_string() {
    skip_nl();
    const Token& t = cur();
    if (t.kind == Token::Kind::str_lit || t.kind == Token::Kind::int_lit ||
        t.kind == Token::Kind::real_lit) {
      std::string s = t.text;
      advance();
      return s;
    }
    fail("expected a string or numeric option value");
  }

  // ---- OpenQASM statements ----

  void qasm_stmt(KernelDef& k, QasmState& qs, bool standalone) {
    skip_nl();
    SourcePos pos = cur().pos;
    if (cur().kind != Token::Kind::ident) fail("expected OpenQASM statement");
    std::string head = cur().text;

    if (head == "OPENQASM") {
      advance();
      skip_nl();
      if (cur().kind == Token::Kind::real_lit || cur().kind == Token::Kind::int_lit)
        advance();
      expect_sym(";");
      return;
    }
    if (head == "include") {
      advance();
      skip_nl();
      if (cur().kind != Token::Kind::str_lit) fail("expected include file name");
      advance();
      expect_sym(";");
      return;
    }
    if (head == "qreg") {
      advance();
      std::string name = expect_ident("register name");
      expect_sym("[");
      long long size = expect_int();
      expect_sym("]");
      expect_sym(";");
      if (size <= 0 || size > (1 << 24))
        throw SyntaxError("qreg size out of range", pos);
      if (standalone) {
        if (!k.signature.params.empty())
          throw UnsupportedQasmFeature("multiple qreg declarations", pos);
        k.signature.params.push_back({ParamType::qreg, name});
        k.declared_qreg_size = static_cast<std::uint32_t>(size);
      } else {
        std::vector<const KernelParam*> qregs;
        for (const auto& p : k.signature.params)
          if (p.type == ParamType::qreg) qregs.push_back(&p);
        if (qs.next_qreg_binding >= static_cast<int>(qregs.size()))
          throw SyntaxError("no qreg parameter left to bind to '" + name + "'",
                            pos);
        qs.qreg_alias[name] = qregs[qs.next_qreg_binding++]->name;
      }
      return;
    }
    if (head == "creg") {
      advance();
      std::string name = expect_ident("register name");
      expect_sym("[");
      long long size = expect_int();
      expect_sym("]");
      expect_sym(";");
      if (size <= 0 || size > (1 << 24))
        throw SyntaxError("creg size out of range", pos);
      qs.cregs[name] = {qs.next_creg_offset, static_cast<std::uint32_t>(size)};
      qs.next_creg_offset += static_cast<std::uint32_t>(size);
      return;
    }
    if (head == "barrier") {
      advance();
      while (!cur().is_sym(";") && !at_end() &&
             cur().kind != Token::Kind::newline)
        advance();
      expect_sym(";");
      return;
    }
    if (head == "gate" || head == "opaque")
      throw UnsupportedQasmFeature("user-defined gates are not supported", pos);
    if (head == "if")
      throw UnsupportedQasmFeature(
          "classically controlled operations are not supported", pos);

    if (head == "measure") {
      advance();
      auto [qreg, qidx] = qasm_operand(k, qs, standalone);
      expect_sym("->");
      std::string cname = expect_ident("classical register");
      ExprPtr cidx;
      if (accept_sym("[")) {
        cidx = make_int(expect_int(), pos);
        expect_sym("]");
      }
      expect_sym(";");
      auto it = qs.cregs.find(cname);
      if (it == qs.cregs.end())
        throw SyntaxError("unknown classical register '" + cname + "'", pos);
      if ((qidx == nullptr) != (cidx == nullptr))
        throw SyntaxError(
            "measure must index both registers or broadcast both", pos);
      GateCall g;
      g.kind = ir::GateKind::Measure;
      g.qubits.push_back({qreg, qidx, pos});
      long long base = it->second.first;
      if (cidx) {
        long long slot = base + cidx->int_value;
        if (cidx->int_value >= static_cast<long long>(it->second.second))
          throw SyntaxError("classical index out of range", pos);
        g.slot = make_int(slot, pos);
      } else {
        g.slot = make_int(base, pos);
      }
      k.body.push_back(make_stmt(std::move(g), pos));
      return;
    }
    if (head == "reset") {
      advance();
      auto [qreg, qidx] = qasm_operand(k, qs, standalone);
      expect_sym(";");
      GateCall g;
      g.kind = ir::GateKind::Reset;
      g.qubits.push_back({qreg, qidx, pos});
      k.body.push_back(make_stmt(std::move(g), pos));
      return;
    }

    auto git = qasm_gate_map().find(head);
    if (git == qasm_gate_map().end())
      throw SyntaxError("unknown OpenQASM gate '" + head + "'", pos);
    advance();
    const QasmGate& spec = git->second;
    std::vector<ExprPtr> params;
    if (accept_sym("(")) {
      while (true) {
        params.push_back(expr());
        if (accept_sym(")")) break;
        expect_sym(",");
      }
    }
    std::vector<QubitExpr> operands;
    while (true) {
      auto [qreg, qidx] = qasm_operand(k, qs, standalone);
      operands.push_back({qreg, qidx, pos});
      if (accept_sym(";")) break;
      expect_sym(",");
    }
    if (spec.identity) return;
    if (spec.toffoli) {
      if (operands.size() != 3)
        throw SyntaxError("ccx expects three qubit operands", pos);
      for (const auto& o : operands)
        if (!o.index)
          throw UnsupportedQasmFeature(
              "register broadcast is not supported for ccx", pos);
      k.body.push_back(
          make_stmt(ToffoliCall{operands[0], operands[1], operands[2]}, pos));
      return;
    }
    GateCall g;
    g.kind = spec.kind;
    if (spec.u2) params.insert(params.begin(), make_real(M_PI / 2, pos));
    std::size_t arity = ir::gate_arity(g.kind);
    std::size_t nparams = ir::gate_param_count(g.kind);
    if (params.size() != nparams)
      throw SyntaxError(head + " expects " + std::to_string(nparams) +
                            " parameters",
                        pos);
    if (operands.size() != arity)
      throw SyntaxError(head + " expects " + std::to_string(arity) +
                            " qubit operands",
                        pos);
    if (arity > 1)
      for (const auto& o : operands)
        if (!o.index)
          throw UnsupportedQasmFeature(
              "register broadcast is not supported for multi-qubit gates", pos);
    g.qubits = std::move(operands);
    g.params = std::move(params);
    k.body.push_back(make_stmt(std::move(g), pos));
  }

  // Returns (kernel register name, index expr or null for broadcast).
  std::pair<std::string, ExprPtr> qasm_operand(KernelDef& k, QasmState& qs,
                                               bool standalone) {
    SourcePos pos = cur().pos;
    std::string name = expect_ident("register name");
    std::string resolved;
    auto alias = qs.qreg_alias.find(name);
    if (alias != qs.qreg_alias.end()) {
      resolved = alias->second;
    } else {
      bool is_param = false;
      for (const auto& p : k.signature.params)
        if (p.type == ParamType::qreg && p.name == name) is_param = true;
      if (!is_param)
        throw SyntaxError("unknown quantum register '" + name + "'", pos);
      resolved = name;
    }
    (void)standalone;
    ExprPtr idx;
    if (accept_sym("[")) {
      idx = expr();
      expect_sym("]");
    }
    return {resolved, idx};
  }

  // ---- Quil lines ----

  void quil_line(KernelDef& k, const std::string& reg) {
    SourcePos pos = cur().pos;
    if (cur().kind != Token::Kind::ident) fail("expected Quil instruction");
    std::string head = cur().text;
    if (is_quil_unsupported(head))
      throw UnsupportedQuilFeature("unsupported Quil instruction '" + head + "'",
                                   pos);

    if (head == "MEASURE") {
      advance();
      ExprPtr q = quil_qubit();
      GateCall g;
      g.kind = ir::GateKind::Measure;
      g.qubits.push_back({reg, q, pos});
      if (cur().kind == Token::Kind::ident) {
        advance();
        expect_sym("[");
        g.slot = make_int(expect_int(), pos);
        expect_sym("]");
      }
      end_quil_line();
      k.body.push_back(make_stmt(std::move(g), pos));
      return;
    }
    if (head == "RESET") {
      advance();
      GateCall g;
      g.kind = ir::GateKind::Reset;
      g.qubits.push_back({reg, quil_qubit(), pos});
      end_quil_line();
      k.body.push_back(make_stmt(std::move(g), pos));
      return;
    }
    if (head == "I") {
      advance();
      quil_qubit();
      end_quil_line();
      return;
    }

    auto git = quil_gate_map().find(head);
    if (git == quil_gate_map().end())
      throw SyntaxError("unknown Quil instruction '" + head + "'", pos);
    advance();
    std::vector<ExprPtr> params;
    if (cur().is_sym("(")) {
      advance();
      while (true) {
        params.push_back(expr());
        if (accept_sym(")")) break;
        expect_sym(",");
      }
    }
    const QuilGate& spec = git->second;
    std::size_t arity = spec.toffoli ? 3 : ir::gate_arity(spec.kind);
    std::size_t nparams = spec.toffoli ? 0 : ir::gate_param_count(spec.kind);
    std::vector<QubitExpr> operands;
    for (std::size_t i = 0; i < arity; ++i)
      operands.push_back({reg, quil_qubit(), pos});
    if (params.size() != nparams)
      throw SyntaxError(head + " expects " + std::to_string(nparams) +
                            " parameters",
                        pos);
    end_quil_line();
    if (spec.toffoli) {
      k.body.push_back(
          make_stmt(ToffoliCall{operands[0], operands[1], operands[2]}, pos));
      return;
    }
    GateCall g;
    g.kind = spec.kind;
    g.qubits = std::move(operands);
    g.params = std::move(params);
    k.body.push_back(make_stmt(std::move(g), pos));
  }

  ExprPtr quil_qubit() {
    if (cur().kind != Token::Kind::int_lit)
      fail("expected a qubit index");
    long long v = cur().int_value;
    SourcePos pos = cur().pos;
    advance();
    if (v < 0) throw SyntaxError("negative qubit index", pos);
    quil_max_qubit_ = std::max(quil_max_qubit_, static_cast<int>(v));
    return make_int(v, pos);
  }

  void end_quil_line() {
    if (cur().kind == Token::Kind::newline || at_end() || cur().is_sym("}"))
      return;
    fail("unexpected trailing tokens on Quil line");
  }
};

namespace fs = std::filesystem;

std::string load_source_impl(const fs::path& path, int depth) {
  if (depth > kMaxIncludeDepth)
    throw FileError("include depth exceeded at " + path.string());
  std::ifstream f(path);
  if (!f) throw FileError("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();

  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos);
    std::size_t ws = line.find_first_not_of(" \t");
    bool spliced = false;
    if (ws != std::string::npos && line.compare(ws, 8, "#include") == 0) {
      std::size_t q1 = line.find('"', ws + 8);
      if (q1 != std::string::npos) {
        std::size_t q2 = line.find('"', q1 + 1);
        if (q2 == std::string::npos)
          throw FileError("malformed #include in " + path.string());
        fs::path inc = path.parent_path() / line.substr(q1 + 1, q2 - q1 - 1);
        out += load_source_impl(inc, depth + 1);
        if (out.empty() || out.back() != '\n') out += '\n';
        spliced = true;
      }
    }
    if (!spliced) {
      out += line;
      out += '\n';
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return out;
}

}  // namespace

std::vector<KernelDef> parse_kernels(const std::string& source) {
  Parser p(tokenize(source));
  return p.translation_unit();
}

std::string load_source(const std::string& path) {
  return load_source_impl(fs::path(path), 0);
}

std::vector<KernelDef> parse_file(const std::string& path) {
  return parse_kernels(load_source(path));
}

KernelDef parse_openqasm_source(const std::string& source,
                                const std::string& kernel_name) {
  Parser p(tokenize(source));
  return p.qasm_standalone(kernel_name);
}

KernelDef parse_quil_source(const std::string& source,
                            const std::string& kernel_name) {
  Parser p(tokenize(source));
  return p.quil_standalone(kernel_name);
}

}  // namespace qk::frontend
