#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qk/errors.hpp"
#include "qk/ir/gate.hpp"

namespace qk::frontend {

enum class SourceLanguage { xasm, openqasm, quil };

struct SourcePos {
  int line = 0;
  int col = 0;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, SourcePos pos)
      : Error("line " + std::to_string(pos.line) + ":" + std::to_string(pos.col) +
              ": " + msg),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

// ---------------------------------------------------------------------------
// Expressions. The classical subset is deliberately small: literals,
// identifiers, vector indexing, q.size(), and arithmetic/logic operators.
// Measurement results enter only through LetBit bindings.

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    int_lit,
    real_lit,
    ident,
    unary,       // op in {-, !, +}
    binary,      // op in arithmetic / comparison / logic / shift set
    reg_size,    // name.size()
    vec_index,   // name[rhs]
  };

  Kind kind;
  SourcePos pos;
  long long int_value = 0;
  double real_value = 0;
  std::string name;  // ident, reg_size, vec_index
  std::string op;    // unary, binary
  ExprPtr lhs, rhs;  // unary uses rhs only
};

ExprPtr make_int(long long v, SourcePos pos = {});
ExprPtr make_real(double v, SourcePos pos = {});
ExprPtr make_ident(std::string name, SourcePos pos = {});

// Qubit operand: register name plus index expression. A null index denotes
// the whole register (OpenQASM broadcast).
struct QubitExpr {
  std::string reg;
  ExprPtr index;
  SourcePos pos;
};

// ---------------------------------------------------------------------------
// Statements.

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct GateCall {
  ir::GateKind kind;
  std::vector<QubitExpr> qubits;
  std::vector<ExprPtr> params;
  // Measure only: absolute classical slot. For a broadcast measure this is
  // the base slot of the destination register. Unset means slot = qubit.
  ExprPtr slot;
};

// OpenQASM ccx, kept symbolic until instantiation expands the CX network.
struct ToffoliCall {
  QubitExpr a, b, target;
};

enum class CallMode { plain, adjoint, ctrl };

struct KernelCall {
  std::string callee;
  CallMode mode = CallMode::plain;
  // ctrl only. A q[i] form names the control qubit directly; a bare integer
  // expression indexes into the first qreg argument of the call.
  ExprPtr ctrl_index;
  std::vector<ExprPtr> args;
};

struct ForStmt {
  std::string var;
  ExprPtr init;
  std::string cmp;  // < <= > >= !=
  ExprPtr bound;
  int step = 1;  // +1 or -1
  std::vector<StmtPtr> body;
};

struct IfStmt {
  ExprPtr cond;
  std::vector<StmtPtr> then_body;
  std::vector<StmtPtr> else_body;
};

// Integer or real binding: `const auto n = q.size();`, `int k = 1 << i;`
struct LetVal {
  std::string var;
  ExprPtr value;
};

// `const bool b = Measure(q[i]);`
struct LetBit {
  std::string var;
  QubitExpr target;
};

// Matrix-builder program of a decompose block:
//   UnitaryMatrix m = UnitaryMatrix::Identity(8, 8);
//   m(6, 6) = 0.0;  ...
// Matrix indices are in ket-label order: the binary string of a row index
// reads qubit 0 first, so qubit 0 is the most-significant bit. Instantiation
// bit-reverses into the internal little-endian convention.
struct MatrixProgram {
  std::string var;
  ExprPtr dim;
  bool identity_init = true;  // Identity(n, n) vs Zero(n, n)
  struct Assign {
    ExprPtr row, col, value;
  };
  std::vector<Assign> assigns;
};

struct DecomposeStmt {
  MatrixProgram program;
  std::string reg;
  std::map<std::string, std::string> options;  // method, tolerance
};

struct Stmt {
  using Node = std::variant<GateCall, ToffoliCall, KernelCall, ForStmt, IfStmt,
                            LetVal, LetBit, DecomposeStmt>;
  Node node;
  SourcePos pos;
};

StmtPtr make_stmt(Stmt::Node node, SourcePos pos);

// ---------------------------------------------------------------------------
// Kernels.

enum class ParamType { qreg, real, integer, real_vector, int_vector };

struct KernelParam {
  ParamType type;
  std::string name;
};

struct KernelSignature {
  std::vector<KernelParam> params;
  int qreg_count() const;
};

struct LanguageSpan {
  SourceLanguage lang;
  int first_line;
  int last_line;
};

struct KernelDef {
  std::string name;
  KernelSignature signature;
  std::vector<StmtPtr> body;
  std::vector<LanguageSpan> language_trace;
  // Register size declared by a standalone OpenQASM source, used as the
  // default allocation when none is given.
  std::optional<std::uint32_t> declared_qreg_size;
};

}  // namespace qk::frontend
