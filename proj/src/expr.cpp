#include "stagekit/expr.hpp"

#include <charconv>
#include <cmath>

#include "stagekit/effects.hpp"
#include "stagekit/node.hpp"

namespace stagekit {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  std::string s(buf, res.ptr);
  // keep integral doubles visibly floating ("4" -> "4.0")
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

static std::string escape_str(const std::string& s) {
  std::string r = "\"";
  for (char c : s) {
    switch (c) {
      case '"': r += "\\\""; break;
      case '\\': r += "\\\\"; break;
      case '\n': r += "\\n"; break;
      case '\t': r += "\\t"; break;
      default: r += c;
    }
  }
  return r + "\"";
}

std::string format_lit(const Lit& l) {
  if (l.is_unit()) return "()";
  if (l.is_int()) return std::to_string(l.i());
  if (l.is_double()) return format_double(l.d());
  if (l.is_bool()) return l.b() ? "true" : "false";
  return escape_str(l.s());
}

std::string Lit::to_string() const { return format_lit(*this); }

std::string Expr::to_string() const {
  if (is_sym()) return "x" + std::to_string(sym);
  return "Const(" + format_lit(lit) + ")";
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Plus: return "Plus";
    case Op::Minus: return "Minus";
    case Op::Times: return "Times";
    case Op::Divide: return "Divide";
    case Op::Lt: return "Lt";
    case Op::Eq: return "Eq";
    case Op::And: return "And";
    case Op::Or: return "Or";
    case Op::Not: return "Not";
    case Op::MathAbs: return "MathAbs";
    case Op::MathSqrt: return "MathSqrt";
    case Op::ToDouble: return "ToDouble";
    case Op::IfThenElse: return "IfThenElse";
    case Op::While: return "While";
    case Op::VarAlloc: return "VarAlloc";
    case Op::VarRead: return "VarRead";
    case Op::VarWrite: return "VarWrite";
    case Op::Print: return "Print";
    case Op::VectorNew: return "VectorNew";
    case Op::VectorRand: return "VectorRand";
    case Op::VectorRandInt: return "VectorRandInt";
    case Op::VectorLiteral: return "VectorLiteral";
    case Op::VectorLength: return "VectorLength";
    case Op::VectorApply: return "VectorApply";
    case Op::VectorUpdate: return "VectorUpdate";
    case Op::ParallelLoop: return "ParallelLoop";
    case Op::Record: return "Record";
    case Op::FieldAccess: return "FieldAccess";
    case Op::ZeroVector: return "ZeroVector";
    case Op::ScalarTimesVector: return "ScalarTimesVector";
    case Op::VectorMinusOp: return "VectorMinus";
    case Op::VectorNorm: return "VectorNorm";
    case Op::UnitVector: return "UnitVector";
  }
  return "?";
}

std::string EffectSummary::to_string() const {
  if (is_pure()) return "[Pure]";
  std::string s = "[";
  s += kind == EffKind::Global ? "Global" : "Simple";
  if (allocates_mutable) s += " alloc";
  if (ordered) s += " ordered";
  if (!may_read.empty()) s += " r=" + may_read.to_string();
  if (!may_write.empty()) s += " w=" + may_write.to_string();
  return s + "]";
}

}  // namespace stagekit
