#include "stagekit/stage.hpp"

#include "stagekit/records.hpp"

namespace stagekit {

namespace {
void expect_kind(const DVal& v, Ty k, const char* what) {
  if (!v.ty().is(k))
    type_error(std::string("handle is not ") + what + ": " +
               v.ty().to_string());
}
}  // namespace

DInt::DInt(const DVal& v) : DVal(v) { expect_kind(v, Ty::Int, "Int"); }
DDouble::DDouble(const DVal& v) : DVal(v) {
  expect_kind(v, Ty::Double, "Double");
}
DBool::DBool(const DVal& v) : DVal(v) { expect_kind(v, Ty::Bool, "Bool"); }
DRec::DRec(const DVal& v) : DVal(v) { expect_kind(v, Ty::Record, "Record"); }
DVec::DVec(const DVal& v) : DVal(v) { expect_kind(v, Ty::Vector, "Vector"); }

Stage::Stage(StageOptions opts)
    : graph_(std::make_shared<Graph>()), opts_(opts) {
  graph_->cse_enabled = opts.cse;
  graph_->fast_math = opts.fast_math;
  install_record_hooks(*this);
}

// ---------------------------------------------------------------------------
// scalar smart constructors

Expr Stage::scalar(Op op, Expr a, Expr b) {
  SemType rty = (op == Op::Lt || op == Op::Eq || op == Op::And || op == Op::Or)
                    ? SemType::boolean()
                    : a.ty;
  return g().atom(Node(op, {std::move(a), std::move(b)}), std::move(rty));
}

// Normalizing constructor for +,-,*,/ with the rewrite order: fold constants,
// move a lone constant to the left for commutative ops, re-associate constant
// prefixes, then registry hooks, then the residual node.
Expr Stage::numeric(Op op, Expr a, Expr b) {
  if (!a.ty.numeric() || a.ty != b.ty)
    type_error(std::string(op_name(op)) + ": operands must be same numeric " +
               "type, got " + a.ty.to_string() + " and " + b.ty.to_string());
  SemType rty = a.ty;

  if (a.is_const() && b.is_const())
    return g().atom(Node(op, {a, b}), rty);  // full constant folding

  bool commutative = op == Op::Plus || op == Op::Times;
  bool normalize = commutative && (a.ty.is(Ty::Int) || opts_.fast_math);
  if (normalize) {
    if (b.is_const() && !a.is_const()) std::swap(a, b);  // d+c -> c+d
    while (a.is_const() && b.is_sym()) {
      const Node* bd = g().def_of(b);
      if (!bd || bd->op != op || !bd->args[0].is_const()) break;
      // c1 . (c2 . d) -> (c1 . c2) . d
      a = g().atom(Node(op, {a, bd->args[0]}), rty);
      b = bd->args[1];
    }
  }

  Node n(op, {a, b});
  if (auto r = rewrites_.apply(*this, op_name(op), n)) return *r;
  return g().atom(std::move(n), rty);
}

// ---------------------------------------------------------------------------
// control flow

Expr Stage::staged_if(Expr cond, const std::function<Expr()>& then_body,
                      const std::function<Expr()>& else_body) {
  if (!cond.ty.is(Ty::Bool)) type_error("conditional needs a Bool condition");
  // Static condition: emit only the taken branch, in the current scope.
  if (cond.is_const()) return cond.lit.b() ? then_body() : else_body();

  BlockId tb = g().reify(then_body);
  BlockId eb = g().reify(else_body);
  const Expr& tr = g().block(tb).result;
  const Expr& er = g().block(eb).result;
  if (tr.ty != er.ty)
    throw StagingError(StagingError::Kind::BranchTypeMismatch,
                       "branches yield " + tr.ty.to_string() + " vs " +
                           er.ty.to_string());

  EffectSummary sum = or_else(g().block_summary(tb), g().block_summary(eb));

  Node n(Op::IfThenElse, {cond});
  n.blocks = {tb, eb};

  AliasInfo alias;
  if (tr.ty.is(Ty::Vector) || tr.ty.is(Ty::Record) || tr.ty.is(Ty::Var)) {
    if (tr.is_sym()) alias.aliases.insert(tr.sym);
    if (er.is_sym()) alias.aliases.insert(er.sym);
  }

  if (sum.relocatable()) {
    if (auto r = rewrites_.apply(*this, "IfThenElse", n)) return *r;
    return g().atom(std::move(n), tr.ty, std::move(alias), sum);
  }
  return g().reflect(std::move(n), tr.ty, sum, std::move(alias));
}

void Stage::while_loop(const std::function<DBool()>& cond,
                       const std::function<void()>& body) {
  BlockId cb = g().reify([&] { return cond().e; });
  BlockId bb = g().reify([&] {
    body();
    return Expr::unit();
  });
  EffectSummary sum =
      and_then(g().block_summary(cb), g().block_summary(bb)).widened_to_may();
  // loops are never dissolved or reordered against other observable effects
  sum.ordered = true;
  sum.kind = max_kind(sum.kind, EffKind::Simple);
  Node n(Op::While);
  n.blocks = {cb, bb};
  g().reflect(std::move(n), SemType::unit(), sum);
}

VarHandle Stage::var_alloc(DVal init) {
  Node n(Op::VarAlloc, {init.e});
  AliasInfo alias;
  if (init.e.is_sym() && !init.ty().numeric() && !init.ty().is(Ty::Bool))
    alias.contains.insert(init.e.sym);
  Expr e = g().reflect_mutable(std::move(n), SemType::var(init.ty()), alias);
  return VarHandle{this, e};
}

DVal VarHandle::read() const {
  Expr e = st->g().atom(Node(Op::VarRead, {this->e}), this->e.ty.inner());
  return DVal{st, e};
}

void VarHandle::write(DVal x) const {
  AliasInfo alias;
  if (x.e.is_sym() && !x.ty().numeric() && !x.ty().is(Ty::Bool))
    alias.contains.insert(x.e.sym);
  st->g().reflect_write(e, Node(Op::VarWrite, {e, x.e}), SemType::unit(),
                        alias);
}

// ---------------------------------------------------------------------------
// generator-stage combinators

void Stage::foreach (DVec v, const std::function<void(DVal)>& f) {
  VarHandle i = var_alloc(lit(int64_t{0}));
  while_loop([&] { return i.read_i() < v.len(); },
             [&] {
               f(v.at(i.read_i()));
               i.write(i.read_i() + int64_t{1});
             });
}

void Stage::amb(DVec v, const std::function<void(DVal)>& k) { foreach (v, k); }

void Stage::bam(const std::vector<DVal>& xs,
                const std::function<void(DVal)>& k) {
  bam_expansions_ += static_cast<long>(xs.size());
  if (bam_expansions_ > opts_.bam_budget && !bam_warned_) {
    bam_warned_ = true;
    warn("bam specialization exceeds budget of " +
         std::to_string(opts_.bam_budget) + " paths; code size may explode");
  }
  for (const DVal& x : xs) k(x);
}

void Stage::require(DBool c, const std::function<void()>& k) {
  if (c.e.is_const()) {
    if (c.e.lit.b()) k();
    return;
  }
  if_then(c, k);
}

// ---------------------------------------------------------------------------
// operators

DInt operator+(DInt a, DInt b) {
  return {a.st, a.st->numeric(Op::Plus, a.e, b.e)};
}
DInt operator-(DInt a, DInt b) {
  return {a.st, a.st->numeric(Op::Minus, a.e, b.e)};
}
DInt operator*(DInt a, DInt b) {
  return {a.st, a.st->numeric(Op::Times, a.e, b.e)};
}
DInt operator/(DInt a, DInt b) {
  return {a.st, a.st->numeric(Op::Divide, a.e, b.e)};
}
DInt operator+(DInt a, int64_t b) { return a + a.st->lit(b); }
DDouble operator+(DDouble a, DDouble b) {
  return {a.st, a.st->numeric(Op::Plus, a.e, b.e)};
}
DDouble operator-(DDouble a, DDouble b) {
  return {a.st, a.st->numeric(Op::Minus, a.e, b.e)};
}
DDouble operator*(DDouble a, DDouble b) {
  return {a.st, a.st->numeric(Op::Times, a.e, b.e)};
}
DDouble operator/(DDouble a, DDouble b) {
  return {a.st, a.st->numeric(Op::Divide, a.e, b.e)};
}
DBool operator<(DInt a, DInt b) { return a.st->lt(a, b); }
DBool operator<(DDouble a, DDouble b) { return a.st->lt(a, b); }
DBool operator==(DInt a, DInt b) { return a.st->eq(a, b); }
DBool operator==(DDouble a, DDouble b) { return a.st->eq(a, b); }

}  // namespace stagekit
