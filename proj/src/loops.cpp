#include "stagekit/loops.hpp"

#include "stagekit/records.hpp"

namespace stagekit {

namespace {

// Shared constructor behind mk_collect / mk_filter_collect.
DVec collect_impl(Stage& st, DInt range,
                  const std::function<DVal(DInt)>& elem,
                  const std::function<DBool(DInt)>* cond, bool append) {
  Graph& g = st.g();

  SymId idx = g.fresh_bound(SemType::i64());
  BlockId body_scope = g.make_block({idx}, g.current_block());
  DInt idx_h{&st, Expr::symbol(idx, SemType::i64())};

  BlockId elem_b = g.reify([&] { return elem(idx_h).e; }, {}, body_scope);
  BlockId cond_b = kNoBlock;
  if (cond)
    cond_b = g.reify([&] { return (*cond)(idx_h).e; }, {}, body_scope);

  const Expr res = g.block(elem_b).result;
  EffectSummary body_sum = g.block_summary(elem_b);
  if (cond_b != kNoBlock)
    body_sum = and_then(g.block_summary(cond_b), body_sum);

  // Vector of records: lower to one collect per field, rebuilt as a record
  // of vectors. The probe staging above is discarded (unreferenced blocks
  // are never scheduled); the element callback is re-run per field.
  if (body_sum.relocatable() && res.is_sym()) {
    if (const Node* rd = g.def_of(res); rd && rd->op == Op::Record) {
      std::string tag = rd->str;
      std::vector<std::string> names = rd->names;
      SemType inner = res.ty;
      Node soa(Op::Record);
      soa.str = tag;
      AliasInfo alias;
      for (const std::string& name : names) {
        auto field_fn = [&st, &elem, name](DInt i) {
          return record_field(st, elem(i), name);
        };
        DVec fv = collect_impl(st, range, field_fn, cond, append);
        soa.names.push_back(name);
        soa.args.push_back(fv.e);
        if (fv.e.is_sym()) alias.contains.insert(fv.e.sym);
      }
      SemType soa_ty = SemType::vec(inner);
      return DVec{DVal{&st, g.atom(std::move(soa), soa_ty, std::move(alias))}};
    }
  }

  // Identity copy of an immutable vector over its whole range: the source
  // itself is the result.
  if (!cond && res.is_sym()) {
    if (const Node* d = g.def_of(res);
        d && d->op == Op::VectorApply && d->args[1].is_sym() &&
        d->args[1].sym == idx) {
      const Expr& src = d->args[0];
      if (src.is_sym() && !g.is_mutable_alloc(src.sym)) {
        Expr len = g.atom(Node(Op::VectorLength, {src}), SemType::i64());
        if (len.same(range.e)) return DVec{DVal{&st, src}};
      }
    }
  }

  LoopElem el;
  el.kind = LoopElem::K::Collect;
  el.out_ty = SemType::vec(res.ty);
  el.elem = elem_b;
  el.cond = cond_b;
  el.append = append;

  Node n(Op::ParallelLoop);
  n.loop = std::make_shared<LoopPayload>();
  n.loop->range = range.e;
  n.loop->index_var = idx;
  n.loop->body_scope = body_scope;
  n.loop->elems = {el};

  AliasInfo alias;
  if (res.is_sym() &&
      (res.ty.is(Ty::Vector) || res.ty.is(Ty::Record) || res.ty.is(Ty::Var)))
    alias.contains.insert(res.sym);

  EffectSummary loop_sum = body_sum.widened_to_may();
  Expr e;
  if (loop_sum.tracked_in_block()) {
    e = g.reflect(std::move(n), el.out_ty, loop_sum, std::move(alias));
  } else {
    e = g.atom(std::move(n), el.out_ty, std::move(alias), loop_sum);
  }
  g.find(e.sym)->def.loop->elems[0].out = e.sym;
  return DVec{DVal{&st, e}};
}

}  // namespace

DVec mk_collect(Stage& st, DInt range,
                const std::function<DVal(DInt)>& elem) {
  return collect_impl(st, range, elem, nullptr, false);
}

DVec mk_filter_collect(Stage& st, DInt range,
                       const std::function<DBool(DInt)>& cond,
                       const std::function<DVal(DInt)>& elem) {
  return collect_impl(st, range, elem, &cond, true);
}

DVal mk_reduce(Stage& st, DInt range, DVal zero,
               const std::function<DVal(DInt)>& elem,
               const std::function<DVal(DVal, DVal)>& combine,
               const std::function<DBool(DInt)>* cond) {
  Graph& g = st.g();
  if (zero.ty().is(Ty::Record))
    type_error("reduce over record values is not supported");

  SymId idx = g.fresh_bound(SemType::i64());
  BlockId body_scope = g.make_block({idx}, g.current_block());
  DInt idx_h{&st, Expr::symbol(idx, SemType::i64())};

  BlockId elem_b = g.reify([&] { return elem(idx_h).e; }, {}, body_scope);
  const Expr res = g.block(elem_b).result;
  if (res.ty != zero.ty())
    type_error("reduce: zero has type " + zero.ty().to_string() +
               " but elements have type " + res.ty.to_string());

  SymId rv_l = g.fresh_bound(res.ty);
  SymId rv_r = g.fresh_bound(res.ty);
  BlockId comb_b = g.reify(
      [&] {
        return combine(DVal{&st, Expr::symbol(rv_l, res.ty)},
                       DVal{&st, Expr::symbol(rv_r, res.ty)})
            .e;
      },
      {rv_l, rv_r}, body_scope);

  BlockId cond_b = kNoBlock;
  if (cond)
    cond_b = g.reify([&] { return (*cond)(idx_h).e; }, {}, body_scope);

  EffectSummary body_sum =
      and_then(g.block_summary(elem_b), g.block_summary(comb_b));
  if (cond_b != kNoBlock)
    body_sum = and_then(g.block_summary(cond_b), body_sum);

  LoopElem el;
  el.kind = LoopElem::K::Reduce;
  el.out_ty = res.ty;
  el.elem = elem_b;
  el.cond = cond_b;
  el.combine = comb_b;
  el.zero = zero.e;
  el.rv_left = rv_l;
  el.rv_right = rv_r;

  Node n(Op::ParallelLoop);
  n.loop = std::make_shared<LoopPayload>();
  n.loop->range = range.e;
  n.loop->index_var = idx;
  n.loop->body_scope = body_scope;
  n.loop->elems = {el};

  EffectSummary loop_sum = body_sum.widened_to_may();
  Expr e;
  if (loop_sum.tracked_in_block()) {
    e = g.reflect(std::move(n), res.ty, loop_sum);
  } else {
    e = g.atom(std::move(n), res.ty, {}, loop_sum);
  }
  g.find(e.sym)->def.loop->elems[0].out = e.sym;
  return DVal{&st, e};
}

void mk_foreach(Stage& st, DInt range,
                const std::function<void(DInt)>& body) {
  Graph& g = st.g();
  SymId idx = g.fresh_bound(SemType::i64());
  BlockId body_scope = g.make_block({idx}, g.current_block());
  DInt idx_h{&st, Expr::symbol(idx, SemType::i64())};

  BlockId block = g.reify(
      [&] {
        body(idx_h);
        return Expr::unit();
      },
      {}, body_scope);

  LoopElem el;
  el.kind = LoopElem::K::Foreach;
  el.out_ty = SemType::unit();
  el.elem = block;

  Node n(Op::ParallelLoop);
  n.loop = std::make_shared<LoopPayload>();
  n.loop->range = range.e;
  n.loop->index_var = idx;
  n.loop->body_scope = body_scope;
  n.loop->elems = {el};

  EffectSummary loop_sum = g.block_summary(block).widened_to_may();
  loop_sum.kind = max_kind(loop_sum.kind, EffKind::Simple);
  Expr e = g.reflect(std::move(n), SemType::unit(), loop_sum);
  g.find(e.sym)->def.loop->elems[0].out = e.sym;
}

}  // namespace stagekit
