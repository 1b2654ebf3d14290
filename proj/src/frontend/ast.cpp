#include "qk/frontend/ast.hpp"

namespace qk::frontend {

ExprPtr make_int(long long v, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::int_lit;
  e->int_value = v;
  e->pos = pos;
  return e;
}

ExprPtr make_real(double v, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::real_lit;
  e->real_value = v;
  e->pos = pos;
  return e;
}

ExprPtr make_ident(std::string name, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::ident;
  e->name = std::move(name);
  e->pos = pos;
  return e;
}

StmtPtr make_stmt(Stmt::Node node, SourcePos pos) {
  auto s = std::make_shared<Stmt>();
  s->node = std::move(node);
  s->pos = pos;
  return s;
}

int KernelSignature::qreg_count() const {
  int n = 0;
  for (const auto& p : params)
    if (p.type == ParamType::qreg) ++n;
  return n;
}

}  // namespace qk::frontend
