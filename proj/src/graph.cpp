#include "stagekit/graph.hpp"

#include <cassert>
#include <cmath>

namespace stagekit {

namespace {

int64_t wrap_add(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) +
                              static_cast<uint64_t>(b));
}
int64_t wrap_sub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) -
                              static_cast<uint64_t>(b));
}
int64_t wrap_mul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) *
                              static_cast<uint64_t>(b));
}

bool same_scalar(const SemType& a, const SemType& b) { return a == b; }

}  // namespace

// ---------------------------------------------------------------------------
// type checking

SemType Graph::typecheck(const Node& d, const SemType& expected) const {
  auto arg = [&](size_t i) -> const Expr& { return d.args.at(i); };
  auto want = [&](size_t i, Ty k, const char* what) {
    if (!arg(i).ty.is(k))
      type_error(std::string(op_name(d.op)) + ": operand " +
                 std::to_string(i) + " must be " + what + ", got " +
                 arg(i).ty.to_string());
  };
  auto numeric_pair = [&]() {
    if (!arg(0).ty.numeric() || !same_scalar(arg(0).ty, arg(1).ty))
      type_error(std::string(op_name(d.op)) +
                 ": operands must be same numeric type, got " +
                 arg(0).ty.to_string() + " and " + arg(1).ty.to_string());
  };
  switch (d.op) {
    case Op::Plus:
    case Op::Minus:
    case Op::Times:
    case Op::Divide:
      numeric_pair();
      return arg(0).ty;
    case Op::Lt:
      numeric_pair();
      return SemType::boolean();
    case Op::Eq:
      if (!same_scalar(arg(0).ty, arg(1).ty) ||
          (!arg(0).ty.numeric() && !arg(0).ty.is(Ty::Bool)))
        type_error("Eq: operands must be same primitive type");
      return SemType::boolean();
    case Op::And:
    case Op::Or:
      want(0, Ty::Bool, "Bool");
      want(1, Ty::Bool, "Bool");
      return SemType::boolean();
    case Op::Not:
      want(0, Ty::Bool, "Bool");
      return SemType::boolean();
    case Op::MathAbs:
      if (!arg(0).ty.numeric()) type_error("MathAbs: numeric operand needed");
      return arg(0).ty;
    case Op::MathSqrt:
      want(0, Ty::Double, "Double");
      return SemType::f64();
    case Op::ToDouble:
      want(0, Ty::Int, "Int");
      return SemType::f64();
    case Op::IfThenElse: {
      want(0, Ty::Bool, "Bool");
      const auto& t = blocks_[d.blocks.at(0)].result.ty;
      const auto& e = blocks_[d.blocks.at(1)].result.ty;
      if (t != e)
        throw StagingError(StagingError::Kind::BranchTypeMismatch,
                           "branches yield " + t.to_string() + " vs " +
                               e.to_string());
      return t;
    }
    case Op::While: {
      const auto& c = blocks_[d.blocks.at(0)].result.ty;
      if (!c.is(Ty::Bool)) type_error("While: condition must yield Bool");
      return SemType::unit();
    }
    case Op::VarAlloc:
      return SemType::var(arg(0).ty);
    case Op::VarRead:
      want(0, Ty::Var, "Var");
      return arg(0).ty.inner();
    case Op::VarWrite:
      want(0, Ty::Var, "Var");
      if (arg(1).ty != arg(0).ty.inner())
        type_error("VarWrite: value type does not match variable");
      return SemType::unit();
    case Op::Print:
      return SemType::unit();
    case Op::VectorNew:
      want(0, Ty::Int, "Int");
      if (d.aux_ty.is(Ty::Unit)) type_error("VectorNew: elem type is Unit");
      return SemType::vec(d.aux_ty);
    case Op::VectorRand:
      want(0, Ty::Int, "Int");
      return SemType::vec(SemType::f64());
    case Op::VectorRandInt:
      want(0, Ty::Int, "Int");
      want(1, Ty::Int, "Int");
      return SemType::vec(SemType::i64());
    case Op::VectorLiteral:
      return SemType::vec(d.aux_ty);
    case Op::VectorLength:
      want(0, Ty::Vector, "Vector");
      return SemType::i64();
    case Op::VectorApply:
      want(0, Ty::Vector, "Vector");
      want(1, Ty::Int, "Int");
      return arg(0).ty.elem();
    case Op::VectorUpdate:
      want(0, Ty::Vector, "Vector");
      want(1, Ty::Int, "Int");
      if (arg(2).ty != arg(0).ty.elem())
        type_error("VectorUpdate: element type mismatch");
      return SemType::unit();
    case Op::ParallelLoop:
      if (!d.loop) type_error("ParallelLoop: missing payload");
      return d.loop->elems.at(0).out_ty;
    case Op::Record: {
      std::vector<std::pair<std::string, SemType>> fs;
      if (d.names.size() != d.args.size() || d.names.empty())
        type_error("Record: needs at least one named field");
      for (size_t i = 0; i < d.names.size(); ++i)
        fs.emplace_back(d.names[i], d.args[i].ty);
      // an SoA wrapper keeps its vector-of-record type; trust `expected`
      if (expected.is(Ty::Vector)) return expected;
      return SemType::rec(d.str, std::move(fs));
    }
    case Op::FieldAccess: {
      const SemType& rt = arg(0).ty;
      if (!rt.is(Ty::Record))
        type_error("FieldAccess: operand is not a record");
      const SemType* ft = rt.field(d.str);
      if (!ft)
        throw StagingError(StagingError::Kind::UnknownField,
                           "no field '" + d.str + "' in " + rt.to_string());
      return *ft;
    }
    case Op::ZeroVector:
      want(0, Ty::Int, "Int");
      return SemType::vec(SemType::f64());
    case Op::ScalarTimesVector:
      want(0, Ty::Double, "Double");
      want(1, Ty::Vector, "Vector");
      return arg(1).ty;
    case Op::VectorMinusOp:
      want(0, Ty::Vector, "Vector");
      want(1, Ty::Vector, "Vector");
      return arg(0).ty;
    case Op::VectorNorm:
      want(0, Ty::Vector, "Vector");
      return SemType::f64();
    case Op::UnitVector:
      want(0, Ty::Vector, "Vector");
      return arg(0).ty;
  }
  type_error("unknown op");
}

// ---------------------------------------------------------------------------
// constant folding

std::optional<Expr> Graph::fold(const Node& d) const {
  auto all_const = [&] {
    for (auto& a : d.args)
      if (!a.is_const()) return false;
    return true;
  };
  auto is_int0 = [](const Expr& e) {
    return e.is_const() && e.lit.is_int() && e.lit.i() == 0;
  };
  auto is_int1 = [](const Expr& e) {
    return e.is_const() && e.lit.is_int() && e.lit.i() == 1;
  };

  switch (d.op) {
    case Op::Plus:
    case Op::Minus:
    case Op::Times:
    case Op::Divide: {
      const Expr& a = d.args[0];
      const Expr& b = d.args[1];
      bool ints = a.ty.is(Ty::Int);
      if (all_const()) {
        if (ints) {
          int64_t x = a.lit.i(), y = b.lit.i();
          switch (d.op) {
            case Op::Plus: return Expr::of_int(wrap_add(x, y));
            case Op::Minus: return Expr::of_int(wrap_sub(x, y));
            case Op::Times: return Expr::of_int(wrap_mul(x, y));
            case Op::Divide:
              if (y == 0) return std::nullopt;  // residual node traps at run
              if (x == INT64_MIN && y == -1) return Expr::of_int(INT64_MIN);
              return Expr::of_int(x / y);
            default: break;
          }
        } else {
          double x = a.lit.d(), y = b.lit.d();
          switch (d.op) {
            case Op::Plus: return Expr::of_double(x + y);
            case Op::Minus: return Expr::of_double(x - y);
            case Op::Times: return Expr::of_double(x * y);
            case Op::Divide: return Expr::of_double(x / y);
            default: break;
          }
        }
      }
      // algebraic identities; exact for Int, gated for Double
      bool ident_ok = ints || fast_math;
      if (ident_ok) {
        if (d.op == Op::Plus && is_int0(a)) return b;
        if (d.op == Op::Plus && is_int0(b)) return a;
        if (d.op == Op::Minus && is_int0(b)) return a;
        if (d.op == Op::Times && is_int1(a)) return b;
        if (d.op == Op::Times && is_int1(b)) return a;
        if (d.op == Op::Times && ints && (is_int0(a) || is_int0(b)))
          return Expr::of_int(0);
        if (fast_math && !ints) {
          auto is_d = [](const Expr& e, double v) {
            return e.is_const() && e.lit.is_double() && e.lit.d() == v;
          };
          if (d.op == Op::Plus && is_d(a, 0.0)) return b;
          if (d.op == Op::Plus && is_d(b, 0.0)) return a;
          if (d.op == Op::Minus && is_d(b, 0.0)) return a;
          if (d.op == Op::Times && is_d(a, 1.0)) return b;
          if (d.op == Op::Times && is_d(b, 1.0)) return a;
        }
      }
      return std::nullopt;
    }
    case Op::Lt:
      if (all_const()) {
        bool ints = d.args[0].ty.is(Ty::Int);
        return Expr::of_bool(ints ? d.args[0].lit.i() < d.args[1].lit.i()
                                  : d.args[0].lit.d() < d.args[1].lit.d());
      }
      return std::nullopt;
    case Op::Eq:
      if (all_const()) {
        const Lit& x = d.args[0].lit;
        const Lit& y = d.args[1].lit;
        if (x.is_int()) return Expr::of_bool(x.i() == y.i());
        if (x.is_double()) return Expr::of_bool(x.d() == y.d());
        if (x.is_bool()) return Expr::of_bool(x.b() == y.b());
      }
      return std::nullopt;
    case Op::And:
      if (all_const())
        return Expr::of_bool(d.args[0].lit.b() && d.args[1].lit.b());
      if (d.args[0].is_const())
        return d.args[0].lit.b() ? std::optional<Expr>(d.args[1])
                                 : std::optional<Expr>(Expr::of_bool(false));
      return std::nullopt;
    case Op::Or:
      if (all_const())
        return Expr::of_bool(d.args[0].lit.b() || d.args[1].lit.b());
      if (d.args[0].is_const())
        return d.args[0].lit.b() ? std::optional<Expr>(Expr::of_bool(true))
                                 : std::optional<Expr>(d.args[1]);
      return std::nullopt;
    case Op::Not:
      if (all_const()) return Expr::of_bool(!d.args[0].lit.b());
      return std::nullopt;
    case Op::MathAbs:
      if (all_const()) {
        if (d.args[0].ty.is(Ty::Int)) {
          int64_t v = d.args[0].lit.i();
          return Expr::of_int(v == INT64_MIN ? INT64_MIN : (v < 0 ? -v : v));
        }
        return Expr::of_double(std::fabs(d.args[0].lit.d()));
      }
      return std::nullopt;
    case Op::MathSqrt:
      if (all_const()) return Expr::of_double(std::sqrt(d.args[0].lit.d()));
      return std::nullopt;
    case Op::ToDouble:
      if (all_const())
        return Expr::of_double(static_cast<double>(d.args[0].lit.i()));
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// aliasing and implicit reads

SymSet Graph::value_reach(const Expr& e) const {
  if (!e.is_sym()) return {};
  const Statement* st = find(e.sym);
  return st ? st->reach_mut : SymSet{};
}

SymSet Graph::alias_targets(const Expr& e) const {
  if (!e.is_sym()) return {};
  const Statement* st = find(e.sym);
  if (!st) return {};
  if (st->eff.allocates_mutable) return SymSet{st->sym};
  SymSet r;
  for (SymId a : st->alias.aliases)
    r.merge(alias_targets(Expr::symbol(a, SemType::unit())));
  return r;
}

// Which operands an op reads through (deep value access of the allocation).
SymSet Graph::implicit_reads(const Node& d) const {
  auto reach_of = [&](size_t i) { return value_reach(d.args[i]); };
  SymSet r;
  switch (d.op) {
    case Op::VarRead:
    case Op::Print:
    case Op::VectorApply:
    case Op::VectorNorm:
    case Op::UnitVector:
    case Op::ZeroVector:
      if (!d.args.empty()) r.merge(reach_of(0));
      break;
    case Op::ScalarTimesVector:
      r.merge(reach_of(1));
      break;
    case Op::VectorMinusOp:
      r.merge(reach_of(0));
      r.merge(reach_of(1));
      break;
    case Op::VarWrite:
      r.merge(reach_of(1));  // value being stored is read
      break;
    case Op::VectorUpdate:
      r.merge(reach_of(2));
      break;
    default:
      break;
  }
  return r;
}

void Graph::check_sharing(const Node& d, const EffectSummary& eff,
                          const AliasInfo& alias, const SymSet& reach) const {
  // A mutable allocation must not make another mutable allocation reachable.
  if (eff.allocates_mutable && !reach.empty()) {
    throw StagingError(
        StagingError::Kind::IllegalSharing,
        std::string(op_name(d.op)) +
            " would make a mutable allocation reachable from another "
            "mutable allocation " +
            reach.to_string());
  }
  // Storing a value that reaches mutable state into a mutable allocation.
  if (eff.has_writes()) {
    SymSet stored;
    for (SymId c : alias.contains)
      stored.merge(value_reach(Expr::symbol(c, SemType::unit())));
    if (!stored.empty())
      throw StagingError(StagingError::Kind::IllegalSharing,
                         std::string(op_name(d.op)) +
                             " stores a reference to mutable allocation " +
                             stored.to_string() +
                             " inside another mutable allocation");
  }
}

// ---------------------------------------------------------------------------
// statement construction

Expr Graph::append_stmt(Node def, SemType ty, EffectSummary eff,
                        AliasInfo alias) {
  assert(!frozen_ && !scopes_.empty());

  // operands must already belong to this context
  for (auto& a : def.args) {
    if (a.is_sym() && !find(a.sym) && !is_bound(a.sym))
      type_error("operand x" + std::to_string(a.sym) +
                 " does not belong to this graph");
  }

  SymSet reach;
  for (SymId s : alias.aliases) reach.merge(value_reach(Expr::symbol(s, ty)));
  for (SymId s : alias.contains) reach.merge(value_reach(Expr::symbol(s, ty)));
  for (SymId s : alias.extracts_from)
    reach.merge(value_reach(Expr::symbol(s, ty)));

  check_sharing(def, eff, alias, reach);

  SymId sym = next_sym_++;
  if (eff.allocates_mutable) reach.insert(sym);

  Statement st;
  st.sym = sym;
  st.def = std::move(def);
  st.eff = eff;
  st.alias = std::move(alias);
  st.ty = ty;
  st.birth = scopes_.back().block;
  st.reach_mut = std::move(reach);

  // adopt nested blocks
  for (BlockId b : st.def.blocks) blocks_[b].owner = sym;
  if (st.def.loop) {
    blocks_[st.def.loop->body_scope].owner = sym;
    for (auto& el : st.def.loop->elems) {
      if (el.elem != kNoBlock) blocks_[el.elem].owner = sym;
      if (el.cond != kNoBlock) blocks_[el.cond].owner = sym;
      if (el.combine != kNoBlock) blocks_[el.combine].owner = sym;
    }
  }

  int32_t idx = static_cast<int32_t>(stmts_.size());
  stmts_.push_back(std::move(st));
  sym_index_[sym] = idx;

  if (eff.tracked_in_block()) scopes_.back().effects.push_back(sym);
  if (!eff.is_pure()) scopes_.back().staged_effectful.push_back(sym);
  if (eff.has_writes()) written_allocs_.merge(eff.may_write);

  return Expr::symbol(sym, ty);
}

Expr Graph::atom(Node def, SemType ty, AliasInfo alias, EffectSummary extra) {
  SemType checked = typecheck(def, ty);
  if (!(checked == ty))
    type_error(std::string(op_name(def.op)) + ": node types to " +
               checked.to_string() + " but was staged as " + ty.to_string());

  if (extra.is_pure()) {
    if (auto folded = fold(def)) return *folded;
  }

  EffectSummary eff = extra;
  SymSet reads = implicit_reads(def);
  if (!reads.empty()) {
    eff.kind = max_kind(eff.kind, EffKind::Simple);
    eff.may_read.merge(reads);
    eff.must_read.merge(reads);
  }

  if (eff.is_pure()) {
    if (cse_enabled && !def.has_blocks()) {
      auto it = cse_.find(def);
      if (it != cse_.end()) {
        const Statement* prev = find(it->second);
        return Expr::symbol(it->second, prev->ty);
      }
      Expr e = append_stmt(def, ty, eff, std::move(alias));
      cse_.emplace(stmts_.back().def, e.sym);
      return e;
    }
    return append_stmt(std::move(def), ty, eff, std::move(alias));
  }
  // value-level node that reads mutable state: appended, never deduplicated
  return append_stmt(std::move(def), ty, eff, std::move(alias));
}

Expr Graph::reflect(Node def, SemType ty, EffectSummary eff, AliasInfo alias) {
  SemType checked = typecheck(def, ty);
  if (!(checked == ty))
    type_error(std::string(op_name(def.op)) + ": node types to " +
               checked.to_string() + " but was staged as " + ty.to_string());
  if (eff.is_pure()) eff.kind = EffKind::Simple;
  SymSet reads = implicit_reads(def);
  eff.may_read.merge(reads);
  eff.must_read.merge(reads);
  return append_stmt(std::move(def), ty, eff, std::move(alias));
}

Expr Graph::reflect_mutable(Node def, SemType ty, AliasInfo alias) {
  return reflect(std::move(def), ty, EffectSummary::alloc(), std::move(alias));
}

Expr Graph::reflect_ordered(Node def, SemType ty, AliasInfo alias) {
  return reflect(std::move(def), ty, EffectSummary::opaque(),
                 std::move(alias));
}

Expr Graph::reflect_write(Expr target, Node def, SemType ty, AliasInfo alias) {
  SymSet targets = alias_targets(target);
  if (targets.empty())
    throw StagingError(
        StagingError::Kind::WriteToImmutable,
        "write target " + target.to_string() + " is not a mutable allocation");
  EffectSummary eff;
  eff.kind = EffKind::Simple;
  eff.may_write = targets;
  if (targets.size() == 1) eff.must_write = targets;
  return reflect(std::move(def), ty, eff, std::move(alias));
}

// ---------------------------------------------------------------------------
// scopes

BlockId Graph::make_block(std::vector<SymId> bound, BlockId parent) {
  BlockData b;
  b.parent = parent;
  b.bound = bound;
  blocks_.push_back(std::move(b));
  BlockId id = static_cast<BlockId>(blocks_.size() - 1);
  for (SymId s : blocks_.back().bound) bound_home_[s] = id;
  return id;
}

BlockId Graph::open_scope(std::vector<SymId> bound, BlockId parent_override) {
  BlockId parent =
      parent_override != kNoBlock
          ? parent_override
          : (scopes_.empty() ? kNoBlock : scopes_.back().block);
  BlockId id = make_block(std::move(bound), parent);
  scopes_.push_back(Scope{id, {}, {}});
  return id;
}

BlockId Graph::close_scope(Expr result) {
  assert(!scopes_.empty());
  Scope sc = std::move(scopes_.back());
  scopes_.pop_back();
  BlockData& b = blocks_[sc.block];
  b.result = std::move(result);
  b.effects = std::move(sc.effects);
  EffectSummary sum;
  for (SymId s : sc.staged_effectful) {
    const Statement* st = find(s);
    if (st) sum = and_then(sum, st->eff);
  }
  b.summary = sum;
  b.closed = true;
  return sc.block;
}

BlockId Graph::reify(const std::function<Expr()>& body,
                     std::vector<SymId> bound, BlockId parent_override) {
  open_scope(std::move(bound), parent_override);
  Expr r = body();
  return close_scope(std::move(r));
}

SymId Graph::fresh_bound(SemType ty) {
  SymId s = next_sym_++;
  bound_syms_.insert(s);
  bound_ty_.emplace(s, std::move(ty));
  return s;
}

void Graph::register_bound(SymId s, SemType ty, BlockId home) {
  bound_syms_.insert(s);
  bound_ty_.insert_or_assign(s, std::move(ty));
  bound_home_[s] = home;
}

void Graph::begin_program() {
  assert(scopes_.empty() && root_ == kNoBlock);
  root_ = open_scope();
}

void Graph::end_program(Expr result) {
  assert(scopes_.size() == 1);
  close_scope(std::move(result));
}

void Graph::freeze() {
  assert(scopes_.empty());
  frozen_ = true;
  cse_.clear();
}

// ---------------------------------------------------------------------------
// block tree helpers

bool Graph::is_ancestor_or_self(BlockId a, BlockId b) const {
  while (b != kNoBlock) {
    if (a == b) return true;
    b = blocks_[b].parent;
  }
  return false;
}

int Graph::block_depth(BlockId b) const {
  int d = 0;
  while (b != kNoBlock) {
    b = blocks_[b].parent;
    ++d;
  }
  return d;
}

}  // namespace stagekit
