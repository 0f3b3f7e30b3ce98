#include "stagekit/minic.hpp"

#include <sstream>
#include <unordered_map>

#include "stagekit/expr.hpp"

namespace stagekit::minic {

ExprPtr Expr::int_lit(int64_t v) {
  auto e = std::make_shared<Expr>();
  e->k = K::IntLit;
  e->i = v;
  return e;
}
ExprPtr Expr::double_lit(double v) {
  auto e = std::make_shared<Expr>();
  e->k = K::DoubleLit;
  e->d = v;
  return e;
}
ExprPtr Expr::bool_lit(bool v) {
  auto e = std::make_shared<Expr>();
  e->k = K::BoolLit;
  e->b = v;
  return e;
}
ExprPtr Expr::str_lit(std::string v) {
  auto e = std::make_shared<Expr>();
  e->k = K::StrLit;
  e->s = std::move(v);
  return e;
}
ExprPtr Expr::unit() {
  auto e = std::make_shared<Expr>();
  e->k = K::UnitLit;
  return e;
}
ExprPtr Expr::ref(std::string name) {
  auto e = std::make_shared<Expr>();
  e->k = K::Ref;
  e->s = std::move(name);
  return e;
}
ExprPtr Expr::unary(std::string op, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->k = K::Unary;
  e->fn = std::move(op);
  e->args = {std::move(a)};
  return e;
}
ExprPtr Expr::binary(std::string op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->k = K::Binary;
  e->fn = std::move(op);
  e->args = {std::move(a), std::move(b)};
  return e;
}
ExprPtr Expr::call(std::string fn, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->k = K::Call;
  e->fn = std::move(fn);
  e->args = std::move(args);
  return e;
}
ExprPtr Expr::index(ExprPtr arr, ExprPtr idx) {
  auto e = std::make_shared<Expr>();
  e->k = K::Index;
  e->args = {std::move(arr), std::move(idx)};
  return e;
}
ExprPtr Expr::cond(ExprPtr c, ExprPtr t, ExprPtr el) {
  auto e = std::make_shared<Expr>();
  e->k = K::Cond;
  e->args = {std::move(c), std::move(t), std::move(el)};
  return e;
}

StmtPtr val(std::string name, ExprPtr e) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::Val;
  s->name = std::move(name);
  s->a = std::move(e);
  return s;
}
StmtPtr var_decl(std::string name, std::string type_str, ExprPtr init) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::Var;
  s->name = std::move(name);
  s->type_str = std::move(type_str);
  s->a = std::move(init);
  return s;
}
StmtPtr assign(std::string name, ExprPtr e) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::Assign;
  s->name = std::move(name);
  s->a = std::move(e);
  return s;
}
StmtPtr store(std::string arr, ExprPtr idx, ExprPtr v) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::Store;
  s->name = std::move(arr);
  s->a = std::move(idx);
  s->b = std::move(v);
  return s;
}
StmtPtr append(std::string arr, ExprPtr v) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::Append;
  s->name = std::move(arr);
  s->a = std::move(v);
  return s;
}
StmtPtr if_stmt(ExprPtr c, std::vector<StmtPtr> body,
                std::vector<StmtPtr> els) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::If;
  s->a = std::move(c);
  s->body = std::move(body);
  s->els = std::move(els);
  return s;
}
StmtPtr while_stmt(ExprPtr c, std::vector<StmtPtr> body) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::While;
  s->a = std::move(c);
  s->body = std::move(body);
  return s;
}
StmtPtr print(ExprPtr e) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::Print;
  s->a = std::move(e);
  return s;
}
StmtPtr ret(ExprPtr e) {
  auto s = std::make_shared<Stmt>();
  s->k = Stmt::K::Return;
  s->a = std::move(e);
  return s;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

std::string escape(const std::string& s) {
  std::string r = "\"";
  for (char c : s) {
    switch (c) {
      case '"': r += "\\\""; break;
      case '\\': r += "\\\\"; break;
      case '\n': r += "\\n"; break;
      default: r += c;
    }
  }
  return r + "\"";
}

int precedence(const std::string& op) {
  if (op == "*" || op == "/") return 5;
  if (op == "+" || op == "-") return 4;
  if (op == "<" || op == "==") return 3;
  if (op == "&&") return 2;
  if (op == "||") return 1;
  return 0;
}

std::string expr_str(const ExprPtr& e, int parent_prec = 0);

std::string args_str(const std::vector<ExprPtr>& args, size_t from = 0) {
  std::string s;
  for (size_t i = from; i < args.size(); ++i) {
    if (i > from) s += ", ";
    s += expr_str(args[i]);
  }
  return s;
}

std::string expr_str(const ExprPtr& e, int parent_prec) {
  switch (e->k) {
    case Expr::K::IntLit: return std::to_string(e->i);
    case Expr::K::DoubleLit: return format_double(e->d);
    case Expr::K::BoolLit: return e->b ? "true" : "false";
    case Expr::K::StrLit: return escape(e->s);
    case Expr::K::UnitLit: return "()";
    case Expr::K::Ref: return e->s;
    case Expr::K::Unary: return e->fn + expr_str(e->args[0], 6);
    case Expr::K::Binary: {
      int p = precedence(e->fn);
      std::string s = expr_str(e->args[0], p) + " " + e->fn + " " +
                      expr_str(e->args[1], p + 1);
      if (p < parent_prec) s = "(" + s + ")";
      return s;
    }
    case Expr::K::Call: {
      if (e->fn == "length") return expr_str(e->args[0], 6) + ".length";
      if (e->fn.rfind("new_array#", 0) == 0)
        return "new Array[" + e->fn.substr(10) + "](" + args_str(e->args) +
               ")";
      if (e->fn.rfind("new_builder#", 0) == 0)
        return "new ArrayBuilder[" + e->fn.substr(12) + "]()";
      if (e->fn.rfind("array#", 0) == 0)
        return "array(" + args_str(e->args) + ")";
      return e->fn + "(" + args_str(e->args) + ")";
    }
    case Expr::K::Index:
      return expr_str(e->args[0], 6) + "(" + expr_str(e->args[1]) + ")";
    case Expr::K::Cond:
      return "if (" + expr_str(e->args[0]) + ") " + expr_str(e->args[1], 6) +
             " else " + expr_str(e->args[2], 6);
    case Expr::K::StructLit: {
      std::string s = "struct " + e->fn + "(";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) s += ", ";
        s += e->names[i] + " = " + expr_str(e->args[i]);
      }
      return s + ")";
    }
    case Expr::K::Field:
      return expr_str(e->args[0], 6) + "." + e->fn;
  }
  return "?";
}

void render_stmts(const std::vector<StmtPtr>& stmts, int depth,
                  std::ostringstream& os);

void render_stmt(const StmtPtr& s, int depth, std::ostringstream& os) {
  std::string ind(static_cast<size_t>(depth) * 2, ' ');
  switch (s->k) {
    case Stmt::K::Val:
      os << ind << "val " << s->name << " = " << expr_str(s->a) << "\n";
      break;
    case Stmt::K::Var:
      os << ind << "var " << s->name << ": " << s->type_str << " = "
         << expr_str(s->a) << "\n";
      break;
    case Stmt::K::Assign:
      os << ind << s->name << " = " << expr_str(s->a) << "\n";
      break;
    case Stmt::K::Store:
      os << ind << s->name << "(" << expr_str(s->a) << ") = "
         << expr_str(s->b) << "\n";
      break;
    case Stmt::K::Append:
      os << ind << s->name << ".append(" << expr_str(s->a) << ")\n";
      break;
    case Stmt::K::If:
      os << ind << "if (" << expr_str(s->a) << ") {\n";
      render_stmts(s->body, depth + 1, os);
      if (!s->els.empty()) {
        os << ind << "} else {\n";
        render_stmts(s->els, depth + 1, os);
      }
      os << ind << "}\n";
      break;
    case Stmt::K::While:
      os << ind << "while (" << expr_str(s->a) << ") {\n";
      render_stmts(s->body, depth + 1, os);
      os << ind << "}\n";
      break;
    case Stmt::K::Print:
      os << ind << "println(" << expr_str(s->a) << ")\n";
      break;
    case Stmt::K::Return:
      os << ind << "return " << expr_str(s->a) << "\n";
      break;
  }
}

void render_stmts(const std::vector<StmtPtr>& stmts, int depth,
                  std::ostringstream& os) {
  for (const StmtPtr& s : stmts) render_stmt(s, depth, os);
}

// --- peephole ---------------------------------------------------------------

void count_refs_expr(const ExprPtr& e,
                     std::unordered_map<std::string, int>& counts) {
  if (!e) return;
  if (e->k == Expr::K::Ref) counts[e->s]++;
  for (const ExprPtr& a : e->args) count_refs_expr(a, counts);
}

void count_refs(const std::vector<StmtPtr>& stmts,
                std::unordered_map<std::string, int>& counts) {
  for (const StmtPtr& s : stmts) {
    count_refs_expr(s->a, counts);
    count_refs_expr(s->b, counts);
    if (s->k == Stmt::K::Store || s->k == Stmt::K::Append ||
        s->k == Stmt::K::Assign)
      counts[s->name]++;  // target names are uses too, do not inline into them
    count_refs(s->body, counts);
    count_refs(s->els, counts);
  }
}

bool subst_expr(ExprPtr& e, const std::string& name, const ExprPtr& repl) {
  if (!e) return false;
  if (e->k == Expr::K::Ref && e->s == name) {
    e = repl;
    return true;
  }
  bool done = false;
  for (ExprPtr& a : e->args) {
    if (subst_expr(a, name, repl)) {
      done = true;
      break;  // single use by construction
    }
  }
  return done;
}

// substitution points of the following statement that are evaluated exactly
// once, before any effect of that statement
bool try_subst_stmt(StmtPtr& s, const std::string& name, const ExprPtr& repl) {
  switch (s->k) {
    case Stmt::K::Val:
    case Stmt::K::Var:
    case Stmt::K::Assign:
    case Stmt::K::Print:
    case Stmt::K::Return:
    case Stmt::K::Append:
      return subst_expr(s->a, name, repl);
    case Stmt::K::Store:
      if (subst_expr(s->a, name, repl)) return true;
      return subst_expr(s->b, name, repl);
    case Stmt::K::If:
      return subst_expr(s->a, name, repl);  // condition only
    case Stmt::K::While:
      return false;  // loop conditions re-evaluate
  }
  return false;
}

void peephole_block(std::vector<StmtPtr>& stmts,
                    const std::unordered_map<std::string, int>& counts) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i + 1 < stmts.size(); ++i) {
      StmtPtr& s = stmts[i];
      if (s->k != Stmt::K::Val) continue;
      auto it = counts.find(s->name);
      if (it == counts.end() || it->second != 1) continue;
      if (try_subst_stmt(stmts[i + 1], s->name, s->a)) {
        stmts.erase(stmts.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
    for (StmtPtr& s : stmts) {
      peephole_block(s->body, counts);
      peephole_block(s->els, counts);
    }
  }
}

}  // namespace

void peephole_inline(Program& p) {
  std::unordered_map<std::string, int> counts;
  count_refs(p.stmts, counts);
  peephole_block(p.stmts, counts);
}

std::string render(const Program& p) {
  std::ostringstream os;
  render_stmts(p.stmts, 0, os);
  return os.str();
}

}  // namespace stagekit::minic
