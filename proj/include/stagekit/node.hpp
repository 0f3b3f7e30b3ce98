#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stagekit/expr.hpp"

namespace stagekit {

using BlockId = int32_t;
constexpr BlockId kNoBlock = -1;

enum class Op : uint8_t {
  // scalar arithmetic / comparison / logic
  Plus,
  Minus,
  Times,
  Divide,
  Lt,
  Eq,
  And,
  Or,
  Not,
  MathAbs,
  MathSqrt,
  ToDouble,
  // control
  IfThenElse,  // blocks: {then, else}, args: {cond}
  While,       // blocks: {cond, body}
  // variables
  VarAlloc,  // args: {init}
  VarRead,   // args: {var}
  VarWrite,  // args: {var, rhs}
  // io
  Print,  // args: {value}
  // vectors
  VectorNew,      // args: {len}, aux_ty = elem type, zero-initialized
  VectorRand,     // args: {len}
  VectorRandInt,  // args: {len, bound}
  VectorLiteral,  // lits payload, aux_ty elem
  VectorLength,   // args: {v}
  VectorApply,    // args: {v, i}
  VectorUpdate,   // args: {v, i, x}
  // structured parallel loop
  ParallelLoop,
  // records
  Record,       // names + args per field, str = tag
  FieldAccess,  // args: {rec}, str = field name
  // vector DSL extension nodes (rewrite tiers 2/3)
  ZeroVector,         // args: {n}
  ScalarTimesVector,  // args: {s, v}
  VectorMinusOp,      // args: {a, b}
  VectorNorm,         // args: {v}
  UnitVector,         // args: {v}
};

const char* op_name(Op op);

struct LoopElem {
  enum class K : uint8_t { Collect, Reduce, Foreach };

  K kind{K::Collect};
  SymId out{kNoSym};  // symbol consumers use for this elem's result
  SemType out_ty{SemType::unit()};
  BlockId elem{kNoBlock};    // Collect/Reduce value; Foreach body
  BlockId cond{kNoBlock};    // optional filter predicate
  BlockId combine{kNoBlock}; // Reduce only
  Expr zero;                 // Reduce only
  SymId rv_left{kNoSym}, rv_right{kNoSym};
  bool append{false};        // Collect with cond appends (filter semantics)

  bool has_cond() const { return cond != kNoBlock; }
};

struct LoopPayload {
  Expr range;
  SymId index_var{kNoSym};
  BlockId body_scope{kNoBlock};  // binds index_var; parent of elem blocks
  std::vector<LoopElem> elems;
};

// One IR definition. A single struct with an op tag plus payload keeps
// structural hashing and equality uniform for the value-numbering table.
struct Node {
  Op op;
  std::vector<Expr> args;
  std::vector<BlockId> blocks;
  SemType aux_ty{SemType::unit()};
  std::string str;
  std::vector<std::string> names;
  std::vector<Lit> lits;
  std::shared_ptr<LoopPayload> loop;

  explicit Node(Op o) : op(o) {}
  Node(Op o, std::vector<Expr> a) : op(o), args(std::move(a)) {}

  bool has_blocks() const { return !blocks.empty() || loop != nullptr; }

  bool operator==(const Node& o) const {
    if (op != o.op || args.size() != o.args.size()) return false;
    for (size_t i = 0; i < args.size(); ++i)
      if (!args[i].same(o.args[i])) return false;
    // blocks compare by identity; distinct reifications never compare equal
    if (blocks != o.blocks) return false;
    if ((loop == nullptr) != (o.loop == nullptr)) return false;
    if (loop && loop != o.loop) return false;
    if (aux_ty != o.aux_ty || str != o.str || names != o.names) return false;
    if (lits.size() != o.lits.size()) return false;
    for (size_t i = 0; i < lits.size(); ++i)
      if (!(lits[i] == o.lits[i])) return false;
    return true;
  }

  size_t hash() const {
    size_t h = static_cast<size_t>(op) * 0x100000001b3ull;
    for (auto& a : args) h = h * 31 + a.hash();
    for (auto b : blocks) h = h * 31 + static_cast<size_t>(b + 7);
    h = h * 31 + aux_ty.hash();
    h = h * 31 + std::hash<std::string>{}(str);
    for (auto& n : names) h = h * 31 + std::hash<std::string>{}(n);
    for (auto& l : lits) h = h * 31 + l.hash();
    if (loop) h = h * 31 + std::hash<const void*>{}(loop.get());
    return h;
  }
};

struct NodeHash {
  size_t operator()(const Node& n) const { return n.hash(); }
};

}  // namespace stagekit
