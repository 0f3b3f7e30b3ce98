#include "stagekit/vectordsl.hpp"

#include "stagekit/records.hpp"

namespace stagekit {

// ---------------------------------------------------------------------------
// sources

DVec vec_rand(Stage& st, DInt n) {
  Expr e = st.g().reflect_mutable(Node(Op::VectorRand, {n.e}),
                                  SemType::vec(SemType::f64()));
  return DVec{DVal{&st, e}};
}

DVec vec_rand_int(Stage& st, DInt n, DInt bound) {
  Expr e = st.g().reflect_mutable(Node(Op::VectorRandInt, {n.e, bound.e}),
                                  SemType::vec(SemType::i64()));
  return DVec{DVal{&st, e}};
}

DVec vec_of(Stage& st, const std::vector<int64_t>& xs) {
  Node n(Op::VectorLiteral);
  n.aux_ty = SemType::i64();
  for (int64_t x : xs) n.lits.emplace_back(x);
  return DVec{DVal{&st, st.g().atom(std::move(n), SemType::vec(SemType::i64()))}};
}

DVec vec_of(Stage& st, const std::vector<double>& xs) {
  Node n(Op::VectorLiteral);
  n.aux_ty = SemType::f64();
  for (double x : xs) n.lits.emplace_back(x);
  return DVec{DVal{&st, st.g().atom(std::move(n), SemType::vec(SemType::f64()))}};
}

DVec vec_alloc(Stage& st, DInt n, SemType elem) {
  if (elem.is(Ty::Record)) {
    // struct of arrays for mutable vectors of records as well
    Node soa(Op::Record);
    soa.str = elem.tag();
    AliasInfo alias;
    for (auto& [name, ft] : elem.fields()) {
      DVec fv = vec_alloc(st, n, ft);
      soa.names.push_back(name);
      soa.args.push_back(fv.e);
      alias.contains.insert(fv.e.sym);
    }
    SemType soa_ty = SemType::vec(elem);
    return DVec{
        DVal{&st, st.g().atom(std::move(soa), soa_ty, std::move(alias))}};
  }
  Node node(Op::VectorNew, {n.e});
  node.aux_ty = elem;
  Expr e = st.g().reflect_mutable(std::move(node), SemType::vec(elem));
  return DVec{DVal{&st, e}};
}

// ---------------------------------------------------------------------------
// element access with SoA look-through

namespace {
const Node* soa_def(const DVal& v) {
  const Node* d = v.st->g().def_of(v.e);
  return d && d->op == Op::Record ? d : nullptr;
}
}  // namespace

DInt DVec::len() const {
  if (const Node* d = soa_def(*this)) {
    return DVec{DVal{st, d->args[0]}}.len();
  }
  return DInt{DVal{
      st, st->g().atom(Node(Op::VectorLength, {e}), SemType::i64())}};
}

DVal DVec::at(DInt i) const {
  if (const Node* d = soa_def(*this)) {
    std::vector<std::pair<std::string, DVal>> fields;
    for (size_t k = 0; k < d->names.size(); ++k)
      fields.emplace_back(d->names[k], DVec{DVal{st, d->args[k]}}.at(i));
    return make_record(*st, d->str, fields);
  }
  return DVal{st,
              st->g().atom(Node(Op::VectorApply, {e, i.e}), e.ty.elem())};
}

DDouble DVec::at_d(DInt i) const { return DDouble(at(i)); }
DInt DVec::at_i(DInt i) const { return DInt(at(i)); }

void DVec::update(DInt i, DVal x) const {
  if (const Node* d = soa_def(*this)) {
    for (size_t k = 0; k < d->names.size(); ++k) {
      DVal fx = record_field(*st, x, d->names[k]);
      DVec{DVal{st, d->args[k]}}.update(i, fx);
    }
    return;
  }
  AliasInfo alias;
  if (x.e.is_sym() && (x.ty().is(Ty::Vector) || x.ty().is(Ty::Record)))
    alias.contains.insert(x.e.sym);
  st->g().reflect_write(e, Node(Op::VectorUpdate, {e, i.e, x.e}),
                        SemType::unit(), alias);
}

// ---------------------------------------------------------------------------
// bulk operations

DVec DVec::map(const std::function<DVal(DVal)>& f) const {
  DVec self = *this;
  return mk_collect(*st, len(), [self, f](DInt i) { return f(self.at(i)); });
}

DVec DVec::zip_with(DVec other,
                    const std::function<DVal(DVal, DVal)>& f) const {
  DVec self = *this;
  return mk_collect(*st, len(), [self, other, f](DInt i) {
    return f(self.at(i), other.at(i));
  });
}

DVal DVec::sum() const {
  DVec self = *this;
  Stage& s = *st;
  const SemType& et = e.ty.elem();
  DVal zero = et.is(Ty::Int) ? DVal(s.lit(int64_t{0})) : DVal(s.lit(0.0));
  return mk_reduce(
      s, len(), zero, [self](DInt i) { return self.at(i); },
      [&s](DVal l, DVal r) {
        return DVal{&s, s.numeric(Op::Plus, l.e, r.e)};
      });
}

DDouble DVec::avg() const {
  DDouble total(sum());
  return total / st->to_double(len());
}

DInt DVec::count_where(const std::function<DBool(DVal)>& pred) const {
  DVec self = *this;
  Stage& s = *st;
  std::function<DBool(DInt)> cond = [self, pred](DInt i) {
    return pred(self.at(i));
  };
  return DInt(mk_reduce(
      s, len(), s.lit(int64_t{0}),
      [&s](DInt) -> DVal { return s.lit(int64_t{1}); },
      [&s](DVal l, DVal r) {
        return DVal{&s, s.numeric(Op::Plus, l.e, r.e)};
      },
      &cond));
}

DVec DVec::find_indexes(const std::function<DBool(DVal)>& pred) const {
  DVec self = *this;
  std::function<DBool(DInt)> cond = [self, pred](DInt i) {
    return pred(self.at(i));
  };
  return mk_filter_collect(*st, len(), cond,
                           [](DInt i) -> DVal { return i; });
}

// ---------------------------------------------------------------------------
// statistics

static DDouble square(DDouble x) { return x * x; }

DDouble mean(Stage& st, DVec x) {
  DVal total = mk_reduce(
      st, x.len(), st.lit(0.0), [x](DInt i) { return x.at(i); },
      [&st](DVal l, DVal r) {
        return DVal{&st, st.numeric(Op::Plus, l.e, r.e)};
      });
  return DDouble(total) / st.to_double(x.len());
}

DDouble variance(Stage& st, DVec x) {
  DVal total_sq = mk_reduce(
      st, x.len(), st.lit(0.0),
      [x](DInt i) { return square(DDouble(x.at(i))); },
      [&st](DVal l, DVal r) {
        return DVal{&st, st.numeric(Op::Plus, l.e, r.e)};
      });
  return DDouble(total_sq) / st.to_double(x.len()) - square(mean(st, x));
}

// ---------------------------------------------------------------------------
// norm / dist rewrite tiers

DVec vec_zeros(Stage& st, DInt n) {
  if (st.options().tier != NormTier::Library) {
    return DVec{DVal{
        &st, st.g().atom(Node(Op::ZeroVector, {n.e}),
                         SemType::vec(SemType::f64()))}};
  }
  return mk_collect(st, n, [&st](DInt) -> DVal { return st.lit(0.0); });
}

DVec scalar_times_vector(Stage& st, DDouble s, DVec v) {
  if (st.options().tier != NormTier::Library) {
    Node n(Op::ScalarTimesVector, {s.e, v.e});
    if (auto r = st.rewrites().apply(st, "ScalarTimesVector", n))
      return DVec{DVal{&st, *r}};
    return DVec{DVal{&st, st.g().atom(std::move(n), v.e.ty)}};
  }
  return v.map([s](DVal x) -> DVal { return s * DDouble(x); });
}

DVec vec_minus(Stage& st, DVec a, DVec b) {
  if (st.options().tier == NormTier::Node) {
    return DVec{
        DVal{&st, st.g().atom(Node(Op::VectorMinusOp, {a.e, b.e}), a.e.ty)}};
  }
  return a.zip_with(b, [](DVal x, DVal y) -> DVal {
    return DDouble(x) - DDouble(y);
  });
}

DDouble norm(Stage& st, DVec v) {
  Node probe(Op::VectorNorm, {v.e});
  if (auto r = st.rewrites().apply(st, "norm", probe))
    return DDouble(DVal{&st, *r});
  // library implementation: sqrt of the sum of squares
  DVec squared = v.map([](DVal x) -> DVal { return square(DDouble(x)); });
  return st.sqrt(DDouble(squared.sum()));
}

DDouble dist(Stage& st, DVec a, DVec b) { return norm(st, vec_minus(st, a, b)); }

void install_tier_hooks(Stage& st) {
  NormTier tier = st.options().tier;
  if (tier == NormTier::Library) return;

  // producer pattern matching with fall-through to the library default
  st.rewrites().add("norm", [](Stage& s, const Node& n) -> std::optional<Expr> {
    const Expr& v = n.args[0];
    const Node* d = s.g().def_of(v);
    if (d && d->op == Op::ZeroVector) return Expr::of_double(0.0);
    if (d && d->op == Op::ScalarTimesVector) {
      DDouble scaled = DDouble(DVal{&s, d->args[0]}) *
                       norm(s, DVec{DVal{&s, d->args[1]}});
      return scaled.e;
    }
    return std::nullopt;
  });

  if (tier == NormTier::Node) {
    // custom definitions: residual norm becomes its own node, and
    // scaling by a reciprocal norm marks a unit vector
    st.rewrites().add("norm",
                      [](Stage& s, const Node& n) -> std::optional<Expr> {
                        const Node* d = s.g().def_of(n.args[0]);
                        if (d && d->op == Op::UnitVector)
                          return Expr::of_double(1.0);
                        if (d && (d->op == Op::ZeroVector ||
                                  d->op == Op::ScalarTimesVector))
                          return std::nullopt;  // defer to the match tier hook
                        return s.g().atom(Node(Op::VectorNorm, {n.args[0]}),
                                          SemType::f64());
                      });
    st.rewrites().add(
        "ScalarTimesVector",
        [](Stage& s, const Node& n) -> std::optional<Expr> {
          const Node* sd = s.g().def_of(n.args[0]);
          if (sd && sd->op == Op::Divide && sd->args[0].is_const() &&
              sd->args[0].lit.is_double() && sd->args[0].lit.d() == 1.0) {
            const Node* nd = s.g().def_of(sd->args[1]);
            if (nd && nd->op == Op::VectorNorm &&
                nd->args[0].same(n.args[1])) {
              return s.g().atom(Node(Op::UnitVector, {n.args[1]}),
                                n.args[1].ty);
            }
          }
          return std::nullopt;
        });
  }
}

// ---------------------------------------------------------------------------

void bulk_update(Stage& st, DVec v, DVec idxs, DVal value) {
  mk_foreach(st, idxs.len(),
             [&](DInt j) { v.update(idxs.at_i(j), value); });
}

}  // namespace stagekit
