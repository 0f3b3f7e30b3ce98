#include "stagekit/codegen.hpp"

#include <json.hpp>

namespace stagekit {

using minic::Expr;
using minic::ExprPtr;
using minic::StmtPtr;

const char* kernel_pattern_name(KernelPattern p) {
  switch (p) {
    case KernelPattern::LoopCollect: return "loop-collect";
    case KernelPattern::LoopReduce: return "loop-reduce";
    case KernelPattern::LoopForeach: return "loop-foreach";
    case KernelPattern::SingleTask: return "single-task";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// emit context

ExprPtr EmitCtx::expr_of(const stagekit::Expr& e) {
  if (e.is_const()) {
    if (e.lit.is_int()) return Expr::int_lit(e.lit.i());
    if (e.lit.is_double()) return Expr::double_lit(e.lit.d());
    if (e.lit.is_bool()) return Expr::bool_lit(e.lit.b());
    if (e.lit.is_str()) return Expr::str_lit(e.lit.s());
    return Expr::unit();
  }
  auto it = env.find(e.sym);
  if (it == env.end())
    throw StagingError(StagingError::Kind::GenerationFailed,
                       "x" + std::to_string(e.sym) +
                           " referenced before emission");
  return it->second;
}

std::string EmitCtx::minic_type(const SemType& t) const {
  switch (t.kind()) {
    case Ty::Int: return "Int";
    case Ty::Double: return "Double";
    case Ty::Bool: return "Boolean";
    case Ty::Str: return "String";
    case Ty::Unit: return "Unit";
    case Ty::Vector: return "Array[" + minic_type(t.elem()) + "]";
    case Ty::Record: return "Struct[" + t.tag() + "]";
    case Ty::Var: return minic_type(t.inner());
  }
  return "?";
}

ExprPtr EmitCtx::zero_of(const SemType& t) const {
  switch (t.kind()) {
    case Ty::Int: return Expr::int_lit(0);
    case Ty::Double: return Expr::double_lit(0.0);
    case Ty::Bool: return Expr::bool_lit(false);
    case Ty::Str: return Expr::str_lit("");
    default: return Expr::unit();
  }
}

void EmitCtx::emit_stmt(int32_t idx) {
  const Statement& st = g.stmts()[idx];
  auto it = reg.by_op.find(st.def.op);
  if (it == reg.by_op.end())
    throw StagingError(StagingError::Kind::GenerationFailed,
                       "don't know how to generate code for: " +
                           std::string(op_name(st.def.op)) + " (x" +
                           std::to_string(st.sym) + ")");
  it->second(*this, idx);
}

void EmitCtx::emit_block(BlockId b) {
  for (int32_t idx : s.block_stmts(b)) emit_stmt(idx);
}

ExprPtr EmitCtx::emit_value_block(BlockId b) {
  emit_block(b);
  return expr_of(g.block(b).result);
}

ExprPtr EmitCtx::block_as_expr(BlockId b) {
  // build an expression for the whole block without emitting statements
  std::unordered_map<SymId, ExprPtr> local;
  for (int32_t idx : s.block_stmts(b)) {
    const Statement& st = g.stmts()[idx];
    auto sub = [&](const stagekit::Expr& e) -> ExprPtr {
      if (e.is_sym()) {
        auto lit = local.find(e.sym);
        if (lit != local.end()) return lit->second;
      }
      return expr_of(e);
    };
    ExprPtr built;
    switch (st.def.op) {
      case Op::Plus: built = Expr::binary("+", sub(st.def.args[0]), sub(st.def.args[1])); break;
      case Op::Minus: built = Expr::binary("-", sub(st.def.args[0]), sub(st.def.args[1])); break;
      case Op::Times: built = Expr::binary("*", sub(st.def.args[0]), sub(st.def.args[1])); break;
      case Op::Divide: built = Expr::binary("/", sub(st.def.args[0]), sub(st.def.args[1])); break;
      case Op::Lt: built = Expr::binary("<", sub(st.def.args[0]), sub(st.def.args[1])); break;
      case Op::Eq: built = Expr::binary("==", sub(st.def.args[0]), sub(st.def.args[1])); break;
      case Op::And: built = Expr::binary("&&", sub(st.def.args[0]), sub(st.def.args[1])); break;
      case Op::Or: built = Expr::binary("||", sub(st.def.args[0]), sub(st.def.args[1])); break;
      case Op::Not: built = Expr::unary("!", sub(st.def.args[0])); break;
      case Op::MathAbs: built = Expr::call("abs", {sub(st.def.args[0])}); break;
      case Op::MathSqrt: built = Expr::call("sqrt", {sub(st.def.args[0])}); break;
      case Op::ToDouble: built = Expr::call("toDouble", {sub(st.def.args[0])}); break;
      case Op::VectorLength: built = Expr::call("length", {sub(st.def.args[0])}); break;
      case Op::VectorApply:
        built = Expr::index(sub(st.def.args[0]), sub(st.def.args[1]));
        break;
      case Op::VarRead: {
        const Node* vd = g.def_of(st.def.args[0]);
        if (!vd || vd->op != Op::VarAlloc) return nullptr;
        built = expr_of(st.def.args[0]);
        break;
      }
      default:
        return nullptr;  // effects or nested control flow: not expressible
    }
    local[st.sym] = built;
  }
  const stagekit::Expr& r = g.block(b).result;
  if (r.is_sym()) {
    auto lit = local.find(r.sym);
    if (lit != local.end()) return lit->second;
  }
  return expr_of(r);
}

// ---------------------------------------------------------------------------
// default emitters

namespace {

void emit_scalar(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  auto a = [&](size_t i) { return c.expr_of(st.def.args[i]); };
  ExprPtr e;
  switch (st.def.op) {
    case Op::Plus: e = Expr::binary("+", a(0), a(1)); break;
    case Op::Minus: e = Expr::binary("-", a(0), a(1)); break;
    case Op::Times: e = Expr::binary("*", a(0), a(1)); break;
    case Op::Divide: e = Expr::binary("/", a(0), a(1)); break;
    case Op::Lt: e = Expr::binary("<", a(0), a(1)); break;
    case Op::Eq: e = Expr::binary("==", a(0), a(1)); break;
    case Op::And: e = Expr::binary("&&", a(0), a(1)); break;
    case Op::Or: e = Expr::binary("||", a(0), a(1)); break;
    case Op::Not: e = Expr::unary("!", a(0)); break;
    case Op::MathAbs: e = Expr::call("abs", {a(0)}); break;
    case Op::MathSqrt: e = Expr::call("sqrt", {a(0)}); break;
    case Op::ToDouble: e = Expr::call("toDouble", {a(0)}); break;
    default: return;
  }
  std::string n = c.name_of(st.sym);
  c.push(minic::val(n, e));
  c.bind(st.sym, Expr::ref(n));
}

void emit_if(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  ExprPtr cond = c.expr_of(st.def.args[0]);
  BlockId tb = st.def.blocks[0];
  BlockId eb = st.def.blocks[1];
  bool unit = st.ty.is(Ty::Unit);
  const auto& tms = c.s.block_stmts(tb);
  const auto& ems = c.s.block_stmts(eb);

  if (!unit && tms.empty() && ems.empty()) {
    ExprPtr t = c.expr_of(c.g.block(tb).result);
    ExprPtr e = c.expr_of(c.g.block(eb).result);
    std::string n = c.name_of(st.sym);
    c.push(minic::val(n, Expr::cond(cond, t, e)));
    c.bind(st.sym, Expr::ref(n));
    return;
  }

  std::string n = c.name_of(st.sym);
  if (!unit)
    c.push(minic::var_decl(n, c.minic_type(st.ty), c.zero_of(st.ty)));

  std::vector<StmtPtr> tbody, ebody;
  auto* saved = c.out;
  c.out = &tbody;
  ExprPtr tres = c.emit_value_block(tb);
  if (!unit) c.push(minic::assign(n, tres));
  c.out = &ebody;
  ExprPtr eres = c.emit_value_block(eb);
  if (!unit) c.push(minic::assign(n, eres));
  c.out = saved;

  c.push(minic::if_stmt(cond, std::move(tbody), std::move(ebody)));
  if (!unit) c.bind(st.sym, Expr::ref(n));
}

void emit_while(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  BlockId cb = st.def.blocks[0];
  BlockId bb = st.def.blocks[1];

  ExprPtr cond = c.block_as_expr(cb);
  if (cond) {
    std::vector<StmtPtr> body;
    auto* saved = c.out;
    c.out = &body;
    c.emit_block(bb);
    c.out = saved;
    c.push(minic::while_stmt(cond, std::move(body)));
    return;
  }

  // condition has observable work: evaluate before the loop and again at
  // the end of each iteration
  std::string cv = "c" + std::to_string(st.sym);
  c.push(minic::var_decl(cv, "Boolean", Expr::bool_lit(false)));
  ExprPtr first = c.emit_value_block(cb);
  c.push(minic::assign(cv, first));
  std::vector<StmtPtr> body;
  auto* saved = c.out;
  c.out = &body;
  c.emit_block(bb);
  c.rename_pass++;
  ExprPtr again = c.emit_value_block(cb);
  c.push(minic::assign(cv, again));
  c.rename_pass--;
  c.out = saved;
  c.push(minic::while_stmt(Expr::ref(cv), std::move(body)));
}

void emit_var_alloc(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  std::string n = c.name_of(st.sym);
  c.push(minic::var_decl(n, c.minic_type(st.ty.inner()),
                         c.expr_of(st.def.args[0])));
  c.bind(st.sym, Expr::ref(n));
}

std::string var_target_name(EmitCtx& c, const stagekit::Expr& target) {
  const Node* d = c.g.def_of(target);
  if (!d || d->op != Op::VarAlloc)
    throw StagingError(
        StagingError::Kind::GenerationFailed,
        "don't know how to generate code for: variable access through " +
            std::string(d ? op_name(d->op) : "a constant"));
  return c.name_of(target.sym);
}

void emit_var_read(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  std::string n = c.name_of(st.sym);
  c.push(minic::val(n, Expr::ref(var_target_name(c, st.def.args[0]))));
  c.bind(st.sym, Expr::ref(n));
}

void emit_var_write(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  c.push(minic::assign(var_target_name(c, st.def.args[0]),
                       c.expr_of(st.def.args[1])));
}

void emit_print(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  c.push(minic::print(c.expr_of(st.def.args[0])));
}

void emit_named_call(EmitCtx& c, int32_t idx, const std::string& fn) {
  const Statement& st = c.g.stmts()[idx];
  std::vector<ExprPtr> args;
  for (const stagekit::Expr& a : st.def.args) args.push_back(c.expr_of(a));
  std::string n = c.name_of(st.sym);
  c.push(minic::val(n, Expr::call(fn, std::move(args))));
  c.bind(st.sym, Expr::ref(n));
}

void emit_vector_new(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  std::string n = c.name_of(st.sym);
  c.push(minic::val(n, Expr::call("new_array#" + c.minic_type(st.ty.elem()),
                                  {c.expr_of(st.def.args[0])})));
  c.bind(st.sym, Expr::ref(n));
}

void emit_vector_literal(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  std::vector<ExprPtr> args;
  for (const Lit& l : st.def.lits) {
    if (l.is_int())
      args.push_back(Expr::int_lit(l.i()));
    else
      args.push_back(Expr::double_lit(l.d()));
  }
  std::string n = c.name_of(st.sym);
  c.push(minic::val(
      n, Expr::call("array#" + c.minic_type(st.ty.elem()), std::move(args))));
  c.bind(st.sym, Expr::ref(n));
}

void emit_vector_apply(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  std::string n = c.name_of(st.sym);
  c.push(minic::val(n, Expr::index(c.expr_of(st.def.args[0]),
                                   c.expr_of(st.def.args[1]))));
  c.bind(st.sym, Expr::ref(n));
}

std::string array_name(EmitCtx& c, const stagekit::Expr& v) {
  ExprPtr e = c.expr_of(v);
  if (e->k != Expr::K::Ref)
    throw StagingError(StagingError::Kind::GenerationFailed,
                       "array store target is not a named array");
  return e->s;
}

void emit_vector_update(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  c.push(minic::store(array_name(c, st.def.args[0]),
                      c.expr_of(st.def.args[1]), c.expr_of(st.def.args[2])));
}

void emit_record(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::StructLit;
  e->fn = st.def.str;
  e->names = st.def.names;
  for (const stagekit::Expr& a : st.def.args) e->args.push_back(c.expr_of(a));
  std::string n = c.name_of(st.sym);
  c.push(minic::val(n, e));
  c.bind(st.sym, Expr::ref(n));
}

void emit_field(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Field;
  e->fn = st.def.str;
  e->args = {c.expr_of(st.def.args[0])};
  std::string n = c.name_of(st.sym);
  c.push(minic::val(n, e));
  c.bind(st.sym, Expr::ref(n));
}

void emit_parallel_loop(EmitCtx& c, int32_t idx) {
  const Statement& st = c.g.stmts()[idx];
  const LoopPayload& lp = *st.def.loop;
  ExprPtr range = c.expr_of(lp.range);

  // output slots
  for (size_t k = 0; k < lp.elems.size(); ++k) {
    if (!c.s.elem_live(idx, k)) continue;
    const LoopElem& el = lp.elems[k];
    std::string n = c.name_of(el.out);
    switch (el.kind) {
      case LoopElem::K::Collect:
        if (el.append)
          c.push(minic::val(
              n, Expr::call("new_builder#" + c.minic_type(el.out_ty.elem()),
                            {})));
        else
          c.push(minic::val(
              n, Expr::call("new_array#" + c.minic_type(el.out_ty.elem()),
                            {range})));
        c.bind(el.out, Expr::ref(n));
        break;
      case LoopElem::K::Reduce:
        c.push(minic::var_decl(n, c.minic_type(el.out_ty),
                               c.expr_of(el.zero)));
        c.bind(el.out, Expr::ref(n));
        break;
      case LoopElem::K::Foreach:
        break;
    }
  }

  std::string iv = "i" + std::to_string(st.sym);
  c.push(minic::var_decl(iv, "Int", Expr::int_lit(0)));
  c.bind(lp.index_var, Expr::ref(iv));

  std::vector<StmtPtr> body;
  auto* saved = c.out;
  c.out = &body;
  c.emit_block(lp.body_scope);  // work shared between elements

  for (size_t k = 0; k < lp.elems.size(); ++k) {
    if (!c.s.elem_live(idx, k)) continue;
    const LoopElem& el = lp.elems[k];
    std::string n = c.name_of(el.out);

    ExprPtr guard;
    if (el.has_cond()) guard = c.emit_value_block(el.cond);

    std::vector<StmtPtr> inner;
    std::vector<StmtPtr>* dest = c.out;
    if (guard) {
      c.out = &inner;
      dest = &inner;
    }
    (void)dest;
    switch (el.kind) {
      case LoopElem::K::Collect: {
        ExprPtr v = c.emit_value_block(el.elem);
        if (el.append)
          c.push(minic::append(n, v));
        else
          c.push(minic::store(n, Expr::ref(iv), v));
        break;
      }
      case LoopElem::K::Reduce: {
        ExprPtr v = c.emit_value_block(el.elem);
        c.bind(el.rv_left, Expr::ref(n));
        c.bind(el.rv_right, v);
        ExprPtr combined = c.emit_value_block(el.combine);
        c.push(minic::assign(n, combined));
        break;
      }
      case LoopElem::K::Foreach:
        c.emit_block(el.elem);
        break;
    }
    if (guard) {
      c.out = &body;
      c.push(minic::if_stmt(guard, std::move(inner), {}));
    }
  }

  c.push(minic::assign(iv, Expr::binary("+", Expr::ref(iv),
                                        Expr::int_lit(1))));
  c.out = saved;
  c.push(minic::while_stmt(Expr::binary("<", Expr::ref(iv), range),
                           std::move(body)));
}

}  // namespace

EmitterRegistry default_emitters() {
  EmitterRegistry r;
  for (Op op : {Op::Plus, Op::Minus, Op::Times, Op::Divide, Op::Lt, Op::Eq,
                Op::And, Op::Or, Op::Not, Op::MathAbs, Op::MathSqrt,
                Op::ToDouble})
    r.by_op[op] = emit_scalar;
  r.by_op[Op::IfThenElse] = emit_if;
  r.by_op[Op::While] = emit_while;
  r.by_op[Op::VarAlloc] = emit_var_alloc;
  r.by_op[Op::VarRead] = emit_var_read;
  r.by_op[Op::VarWrite] = emit_var_write;
  r.by_op[Op::Print] = emit_print;
  r.by_op[Op::VectorNew] = emit_vector_new;
  r.by_op[Op::VectorRand] = [](EmitCtx& c, int32_t i) {
    emit_named_call(c, i, "randVector");
  };
  r.by_op[Op::VectorRandInt] = [](EmitCtx& c, int32_t i) {
    emit_named_call(c, i, "randIntVector");
  };
  r.by_op[Op::VectorLiteral] = emit_vector_literal;
  r.by_op[Op::VectorLength] = [](EmitCtx& c, int32_t i) {
    emit_named_call(c, i, "length");
  };
  r.by_op[Op::VectorApply] = emit_vector_apply;
  r.by_op[Op::VectorUpdate] = emit_vector_update;
  r.by_op[Op::ParallelLoop] = emit_parallel_loop;
  r.by_op[Op::Record] = emit_record;
  r.by_op[Op::FieldAccess] = emit_field;
  r.by_op[Op::ZeroVector] = [](EmitCtx& c, int32_t i) {
    emit_named_call(c, i, "zerosVector");
  };
  r.by_op[Op::ScalarTimesVector] = [](EmitCtx& c, int32_t i) {
    emit_named_call(c, i, "scaleVector");
  };
  r.by_op[Op::VectorMinusOp] = [](EmitCtx& c, int32_t i) {
    emit_named_call(c, i, "subVectors");
  };
  r.by_op[Op::VectorNorm] = [](EmitCtx& c, int32_t i) {
    emit_named_call(c, i, "normVector");
  };
  r.by_op[Op::UnitVector] = [](EmitCtx& c, int32_t i) {
    emit_named_call(c, i, "unitVector");
  };
  return r;
}

minic::Program emit_minic(const Graph& g, const Schedule& s,
                          const EmitterRegistry& reg) {
  minic::Program p;
  EmitCtx ctx{g, s, reg, {}, &p.stmts, 0};
  ctx.emit_block(g.root());
  const stagekit::Expr& res = g.block(g.root()).result;
  if (!res.ty.is(Ty::Unit)) p.stmts.push_back(minic::ret(ctx.expr_of(res)));
  minic::peephole_inline(p);
  return p;
}

// ---------------------------------------------------------------------------
// kernels + DEG

std::vector<Kernel> build_kernels(const Graph& g, const Schedule& s) {
  const auto& members = s.block_stmts(g.root());
  std::unordered_map<SymId, SymId> produced_by;  // out sym -> kernel id
  for (int32_t idx : members) {
    const Statement& st = g.stmts()[idx];
    produced_by[st.sym] = st.sym;
    if (st.def.loop)
      for (size_t k = 0; k < st.def.loop->elems.size(); ++k)
        if (s.elem_live(idx, k))
          produced_by[st.def.loop->elems[k].out] = st.sym;
  }

  std::vector<Kernel> kernels;
  std::vector<SymId> prev_ordered;
  for (int32_t idx : members) {
    const Statement& st = g.stmts()[idx];
    Kernel k;
    k.id = st.sym;
    k.stmt_idx = idx;
    if (st.def.loop) {
      bool fe = false, co = false;
      for (size_t e = 0; e < st.def.loop->elems.size(); ++e) {
        if (!s.elem_live(idx, e)) continue;
        if (st.def.loop->elems[e].kind == LoopElem::K::Foreach) fe = true;
        if (st.def.loop->elems[e].kind == LoopElem::K::Collect) co = true;
      }
      k.pattern = fe ? KernelPattern::LoopForeach
                     : co ? KernelPattern::LoopCollect
                          : KernelPattern::LoopReduce;
      k.size = st.def.loop->range.is_const()
                   ? format_lit(st.def.loop->range.lit)
                   : "x" + std::to_string(st.def.loop->range.sym);
      for (size_t e = 0; e < st.def.loop->elems.size(); ++e)
        if (s.elem_live(idx, e) &&
            !st.def.loop->elems[e].out_ty.is(Ty::Unit))
          k.outputs.push_back(st.def.loop->elems[e].out);
    } else {
      k.pattern = KernelPattern::SingleTask;
      if (!st.ty.is(Ty::Unit)) k.outputs.push_back(st.sym);
    }
    SymSet ins = stmt_inputs(g, s, idx);
    for (SymId r : ins) {
      auto it = produced_by.find(r);
      if (it != produced_by.end() && it->second != st.sym)
        k.inputs.push_back(it->second);
    }
    std::sort(k.inputs.begin(), k.inputs.end());
    k.inputs.erase(std::unique(k.inputs.begin(), k.inputs.end()),
                   k.inputs.end());
    kernels.push_back(std::move(k));
  }

  // ordering edges that carry no data: read/write conflicts and the
  // observable-effect chain
  for (size_t b = 0; b < kernels.size(); ++b) {
    const Statement& sb = g.stmts()[kernels[b].stmt_idx];
    for (size_t a = 0; a < b; ++a) {
      const Statement& sa = g.stmts()[kernels[a].stmt_idx];
      bool conflict = sa.eff.may_write.intersects(sb.eff.may_read) ||
                      sa.eff.may_write.intersects(sb.eff.may_write) ||
                      sa.eff.may_read.intersects(sb.eff.may_write);
      bool chain = sa.eff.ordered && sb.eff.ordered;
      if (!conflict && !chain) continue;
      bool already = false;
      for (SymId in : kernels[b].inputs)
        if (in == kernels[a].id) already = true;
      if (!already) kernels[b].anti_deps.push_back(kernels[a].id);
    }
  }
  return kernels;
}

std::string deg_to_json(const std::vector<Kernel>& kernels) {
  nlohmann::ordered_json deg;
  deg["kernels"] = nlohmann::ordered_json::array();
  for (const Kernel& k : kernels) {
    nlohmann::ordered_json jk;
    jk["id"] = "x" + std::to_string(k.id);
    jk["pattern"] = kernel_pattern_name(k.pattern);
    auto ids = [](const std::vector<SymId>& v) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (SymId s : v) a.push_back("x" + std::to_string(s));
      return a;
    };
    jk["inputs"] = ids(k.inputs);
    jk["outputs"] = ids(k.outputs);
    jk["antiDeps"] = ids(k.anti_deps);
    if (!k.size.empty()) jk["size"] = k.size;
    deg["kernels"].push_back(std::move(jk));
  }
  return deg.dump(2) + "\n";
}

CodegenResult run_codegen(const Graph& g, const Schedule& s) {
  CodegenResult r;
  EmitterRegistry reg = default_emitters();
  r.program = emit_minic(g, s, reg);
  r.minic_text = minic::render(r.program);
  r.kernels = build_kernels(g, s);
  r.deg_json = deg_to_json(r.kernels);
  return r;
}

}  // namespace stagekit
