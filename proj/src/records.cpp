#include "stagekit/records.hpp"

#include "stagekit/schedule.hpp"

namespace stagekit {

DRec make_record(Stage& st, const std::string& tag,
                 const std::vector<std::pair<std::string, DVal>>& fields) {
  Node n(Op::Record);
  n.str = tag;
  std::vector<std::pair<std::string, SemType>> fts;
  AliasInfo alias;
  for (auto& [name, v] : fields) {
    for (auto& [seen, t] : fts) {
      (void)t;
      if (seen == name)
        type_error("record '" + tag + "' has duplicate field '" + name + "'");
    }
    n.names.push_back(name);
    n.args.push_back(v.e);
    fts.emplace_back(name, v.ty());
    if (v.e.is_sym() &&
        (v.ty().is(Ty::Vector) || v.ty().is(Ty::Record) || v.ty().is(Ty::Var)))
      alias.contains.insert(v.e.sym);
  }
  SemType ty = SemType::rec(tag, std::move(fts));
  return DRec{DVal{&st, st.g().atom(std::move(n), ty, std::move(alias))}};
}

DVal record_field(Stage& st, DVal rec, const std::string& name) {
  if (!rec.ty().is(Ty::Record))
    type_error("field access on non-record " + rec.ty().to_string());
  const SemType* ft = rec.ty().field(name);
  if (!ft)
    throw StagingError(StagingError::Kind::UnknownField,
                       "no field '" + name + "' in " + rec.ty().to_string());

  // look through a visible record creation
  if (const Node* d = st.g().def_of(rec.e); d && d->op == Op::Record) {
    for (size_t i = 0; i < d->names.size(); ++i)
      if (d->names[i] == name) return DVal{&st, d->args[i]};
  }
  Node n(Op::FieldAccess, {rec.e});
  n.str = name;
  AliasInfo alias;
  if (rec.e.is_sym()) alias.extracts_from.insert(rec.e.sym);
  return DVal{&st, st.g().atom(std::move(n), *ft, std::move(alias))};
}

DVal DRec::field(const std::string& name) const {
  return record_field(*st, *this, name);
}
DDouble DRec::field_d(const std::string& name) const {
  return DDouble(field(name));
}

void install_record_hooks(Stage& st) {
  st.rewrites().add(
      "IfThenElse",
      [](Stage& s, const Node& n) -> std::optional<Expr> {
        const Expr& tr = s.g().block(n.blocks[0]).result;
        const Expr& er = s.g().block(n.blocks[1]).result;
        const Node* td = s.g().def_of(tr);
        const Node* ed = s.g().def_of(er);
        if (!td || !ed || td->op != Op::Record || ed->op != Op::Record)
          return std::nullopt;
        if (td->str != ed->str || td->names != ed->names)
          throw StagingError(
              StagingError::Kind::RecordShapeMismatch,
              "conditional arms build '" + td->str + "' {" +
                  std::to_string(td->names.size()) + " fields} vs '" +
                  ed->str + "' {" + std::to_string(ed->names.size()) +
                  " fields}");
        std::vector<std::pair<std::string, DVal>> split;
        for (size_t i = 0; i < td->names.size(); ++i) {
          const Expr& a = td->args[i];
          const Expr& b = ed->args[i];
          Expr v = a.same(b) ? a
                             : s.staged_if(
                                   n.args[0], [&] { return a; },
                                   [&] { return b; });
          split.emplace_back(td->names[i], DVal{&s, v});
        }
        return make_record(s, td->str, split).e;
      });
}

void strict_record_check(const Graph& g, const Schedule& sched) {
  for (int32_t idx : scheduled_preorder(g, sched)) {
    const Statement& st = g.stmts()[idx];
    if (st.def.op == Op::Record) {
      throw StagingError(
          StagingError::Kind::RecordResidualized,
          "record '" + st.def.str + "' (x" + std::to_string(st.sym) +
              ") survives optimization; it would require a runtime object");
    }
    if (st.def.op == Op::FieldAccess) {
      throw StagingError(StagingError::Kind::RecordResidualized,
                         "field access '." + st.def.str + "' (x" +
                             std::to_string(st.sym) +
                             ") could not be resolved statically");
    }
    if (st.def.op == Op::VarAlloc && st.ty.inner().is(Ty::Record)) {
      throw StagingError(StagingError::Kind::RecordResidualized,
                         "mutable variable x" + std::to_string(st.sym) +
                             " holds a record value");
    }
  }
}

// --- complex-number helpers -------------------------------------------------

DRec make_complex(Stage& st, DDouble re, DDouble im) {
  return make_record(st, "Complex", {{"re", re}, {"im", im}});
}
DDouble complex_re(DRec c) { return c.field_d("re"); }
DDouble complex_im(DRec c) { return c.field_d("im"); }

DRec complex_add(DRec a, DRec b) {
  Stage& st = *a.st;
  return make_complex(st, complex_re(a) + complex_re(b),
                      complex_im(a) + complex_im(b));
}
DRec complex_mul(DRec a, DRec b) {
  Stage& st = *a.st;
  DDouble ar = complex_re(a), ai = complex_im(a);
  DDouble br = complex_re(b), bi = complex_im(b);
  return make_complex(st, ar * br - ai * bi, ar * bi + ai * br);
}
DRec complex_scale(DDouble s, DRec c) {
  Stage& st = *s.st;
  return make_complex(st, s * complex_re(c), s * complex_im(c));
}

}  // namespace stagekit
