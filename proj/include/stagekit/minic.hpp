#pragma once

#include <memory>
#include <string>
#include <vector>

namespace stagekit::minic {

// The small first-order imperative target language. See
// docs/minic-grammar.md for the concrete grammar.

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class K {
    IntLit,
    DoubleLit,
    BoolLit,
    StrLit,
    UnitLit,
    Ref,
    Unary,    // op in fn
    Binary,   // op in fn
    Call,     // builtin name in fn
    Index,    // args: {array, index}
    Cond,     // args: {c, t, e}
    StructLit,  // tag in fn, field names in names
    Field,    // field name in fn, args: {record}
  };

  K k{K::UnitLit};
  int64_t i{0};
  double d{0};
  bool b{false};
  std::string s;                  // StrLit value or Ref name
  std::string fn;                 // operator, builtin or field name
  std::vector<std::string> names; // StructLit field names
  std::vector<ExprPtr> args;

  static ExprPtr int_lit(int64_t v);
  static ExprPtr double_lit(double v);
  static ExprPtr bool_lit(bool v);
  static ExprPtr str_lit(std::string v);
  static ExprPtr unit();
  static ExprPtr ref(std::string name);
  static ExprPtr unary(std::string op, ExprPtr a);
  static ExprPtr binary(std::string op, ExprPtr a, ExprPtr b);
  static ExprPtr call(std::string fn, std::vector<ExprPtr> args);
  static ExprPtr index(ExprPtr arr, ExprPtr idx);
  static ExprPtr cond(ExprPtr c, ExprPtr t, ExprPtr e);
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
  enum class K {
    Val,     // val name = a
    Var,     // var name: type = a
    Assign,  // name = a
    Store,   // name(a) = b
    Append,  // name.append(a)
    If,      // if (a) body else els
    While,   // while (a) body
    Print,   // println(a)
    Return,  // return a
  };

  K k{K::Val};
  std::string name;
  std::string type_str;
  ExprPtr a, b;
  std::vector<StmtPtr> body, els;
};

StmtPtr val(std::string name, ExprPtr e);
StmtPtr var_decl(std::string name, std::string type_str, ExprPtr init);
StmtPtr assign(std::string name, ExprPtr e);
StmtPtr store(std::string arr, ExprPtr idx, ExprPtr v);
StmtPtr append(std::string arr, ExprPtr v);
StmtPtr if_stmt(ExprPtr c, std::vector<StmtPtr> body, std::vector<StmtPtr> els);
StmtPtr while_stmt(ExprPtr c, std::vector<StmtPtr> body);
StmtPtr print(ExprPtr e);
StmtPtr ret(ExprPtr e);

struct Program {
  std::vector<StmtPtr> stmts;
};

std::string render(const Program& p);

// Folds single-use value bindings into the immediately-following statement,
// reproducing the compact shape of hand-written imperative code. Safe: the
// evaluation point moves by at most one statement and never into a loop.
void peephole_inline(Program& p);

}  // namespace stagekit::minic
