#include "stagekit/fusion.hpp"

#include <algorithm>
#include <unordered_map>

namespace stagekit {

namespace {

bool fusable_loop(const Statement& st) {
  return st.def.loop && !st.erased && !st.eff.tracked_in_block() &&
         !st.eff.allocates_mutable;
}

// is block b inside the nested blocks of statement with symbol `owner_sym`
bool block_inside_stmt(const Graph& g, BlockId b, SymId owner_sym) {
  while (b != kNoBlock) {
    if (g.block(b).owner == owner_sym) return true;
    b = g.block(b).parent;
  }
  return false;
}

// collect outputs of a loop that are dense unconditional collects
SymSet dense_collect_outs(const Statement& st) {
  SymSet outs;
  for (const LoopElem& el : st.def.loop->elems)
    if (el.kind == LoopElem::K::Collect && !el.append && !el.has_cond())
      outs.insert(el.out);
  return outs;
}

SymSet all_outs(const Statement& st) {
  SymSet outs;
  for (const LoopElem& el : st.def.loop->elems) outs.insert(el.out);
  return outs;
}

struct Substitution {
  std::unordered_map<SymId, Expr> map;

  void rewrite(Expr& e) const {
    if (!e.is_sym()) return;
    auto it = map.find(e.sym);
    if (it != map.end()) e = it->second;
  }
};

std::shared_ptr<Graph> clone_graph(const Graph& g) {
  auto ng = std::make_shared<Graph>(g);
  for (Statement& st : ng->stmts_mut())
    if (st.def.loop) st.def.loop = std::make_shared<LoopPayload>(*st.def.loop);
  return ng;
}

void apply_substitution(Graph& g, const Substitution& sub) {
  for (Statement& st : g.stmts_mut()) {
    if (st.erased) continue;
    for (Expr& a : st.def.args) sub.rewrite(a);
    if (st.def.loop) {
      sub.rewrite(st.def.loop->range);
      for (LoopElem& el : st.def.loop->elems) sub.rewrite(el.zero);
    }
  }
  for (size_t b = 0; b < g.block_count(); ++b)
    sub.rewrite(g.block_mut(static_cast<BlockId>(b)).result);
}

struct PairScan {
  const Graph& g;
  const Schedule& s;

  // member-level adjacency within one block, for the cycle check
  std::vector<int32_t> members;
  std::vector<std::vector<size_t>> succ;

  PairScan(const Graph& gr, const Schedule& sc, BlockId b)
      : g(gr), s(sc), members(sc.block_stmts(b)) {
    size_t n = members.size();
    succ.assign(n, {});
    std::unordered_map<SymId, size_t> outs;
    for (size_t m = 0; m < n; ++m) {
      const Statement& st = g.stmts()[members[m]];
      outs[st.sym] = m;
      if (st.def.loop)
        for (auto& el : st.def.loop->elems) outs[el.out] = m;
    }
    for (size_t m = 0; m < n; ++m) {
      auto it = s.full_refs.find(members[m]);
      if (it != s.full_refs.end()) {
        for (SymId r : it->second) {
          auto o = outs.find(r);
          if (o != outs.end() && o->second != m) succ[o->second].push_back(m);
        }
      }
      const EffectSummary& em = g.stmts()[members[m]].eff;
      if (em.may_read.empty() && em.may_write.empty()) continue;
      for (size_t c = m + 1; c < n; ++c) {
        const EffectSummary& ec = g.stmts()[members[c]].eff;
        if (em.may_write.intersects(ec.may_read) ||
            em.may_write.intersects(ec.may_write) ||
            em.may_read.intersects(ec.may_write))
          succ[m].push_back(c);
      }
    }
  }

  bool path_avoiding_direct(size_t from, size_t to) const {
    // is there a path from -> ... -> to through at least one intermediate
    std::vector<char> seen(members.size(), 0);
    std::vector<size_t> stack;
    for (size_t nxt : succ[from])
      if (nxt != to && !seen[nxt]) {
        seen[nxt] = 1;
        stack.push_back(nxt);
      }
    while (!stack.empty()) {
      size_t cur = stack.back();
      stack.pop_back();
      if (cur == to) return true;
      for (size_t nxt : succ[cur])
        if (!seen[nxt]) {
          seen[nxt] = 1;
          stack.push_back(nxt);
        }
    }
    return false;
  }
};

}  // namespace

std::vector<int32_t> contraction_applies(const Graph& g, const Schedule& s,
                                         int32_t consumer_idx,
                                         const SymSet& producer_outs,
                                         SymId consumer_index_var) {
  std::vector<int32_t> redirect;
  const Statement& consumer = g.stmts()[consumer_idx];
  for (size_t i = 0; i < g.stmts().size(); ++i) {
    const Statement& st = g.stmts()[i];
    if (st.erased || st.birth == kNoBlock) continue;
    if (!s.is_live(static_cast<int32_t>(i))) continue;
    if (!block_inside_stmt(g, st.birth, consumer.sym)) continue;
    bool touches = false;
    for (const Expr& a : st.def.args)
      if (a.is_sym() && producer_outs.contains(a.sym)) touches = true;
    if (st.def.loop) {
      if (st.def.loop->range.is_sym() &&
          producer_outs.contains(st.def.loop->range.sym))
        touches = true;
      for (auto& el : st.def.loop->elems)
        if (el.zero.is_sym() && producer_outs.contains(el.zero.sym))
          touches = true;
    }
    if (!touches) continue;
    bool ok = st.def.op == Op::VectorApply && st.def.args[0].is_sym() &&
              producer_outs.contains(st.def.args[0].sym) &&
              st.def.args[1].is_sym() &&
              st.def.args[1].sym == consumer_index_var;
    if (!ok)
      throw StagingError(
          StagingError::Kind::ContractionBlocked,
          "x" + std::to_string(st.sym) +
              " accesses a produced vector other than at the shared index");
    redirect.push_back(static_cast<int32_t>(i));
  }
  return redirect;
}

FusionOutcome fuse_loops(std::shared_ptr<Graph> g, bool with_motion) {
  FusionOutcome out;
  out.graph = std::move(g);

  bool changed = true;
  while (changed) {
    changed = false;
    const Graph& cur = *out.graph;
    Schedule sched = build_schedule(cur, {true, with_motion});

    // deterministic block order: by id
    std::vector<BlockId> block_ids;
    for (auto& [b, members] : sched.per_block) {
      (void)members;
      block_ids.push_back(b);
    }
    std::sort(block_ids.begin(), block_ids.end());

    for (BlockId b : block_ids) {
      const auto& members = sched.block_stmts(b);
      std::vector<size_t> loop_pos;
      for (size_t m = 0; m < members.size(); ++m)
        if (fusable_loop(cur.stmts()[members[m]])) loop_pos.push_back(m);
      if (loop_pos.size() < 2) continue;

      PairScan scan(cur, sched, b);
      for (size_t ai = 0; ai < loop_pos.size() && !changed; ++ai) {
        for (size_t bi = ai + 1; bi < loop_pos.size() && !changed; ++bi) {
          size_t am = loop_pos[ai], bm = loop_pos[bi];
          int32_t a_idx = members[am], b_idx = members[bm];
          const Statement& A = cur.stmts()[a_idx];
          const Statement& B = cur.stmts()[b_idx];

          bool horizontal = A.def.loop->range.same(B.def.loop->range);
          bool vertical = false;
          if (!horizontal && B.def.loop->range.is_sym()) {
            const Node* rd = cur.def_of(B.def.loop->range);
            if (rd && rd->op == Op::VectorLength && rd->args[0].is_sym() &&
                dense_collect_outs(A).contains(rd->args[0].sym))
              vertical = true;
          }
          if (!horizontal && !vertical) continue;

          // every consumer access of a produced vector must be redirectable
          std::vector<int32_t> redirects;
          SymSet dense = dense_collect_outs(A);
          SymSet produced = all_outs(A);
          try {
            redirects = contraction_applies(cur, sched, b_idx, produced,
                                            B.def.loop->index_var);
            for (int32_t r : redirects)
              if (!dense.contains(cur.stmts()[r].def.args[0].sym))
                throw StagingError(StagingError::Kind::ContractionBlocked,
                                   "filtered collect output consumed inside "
                                   "a fused iteration");
          } catch (const StagingError&) {
            continue;  // pair not eligible
          }

          if (scan.path_avoiding_direct(am, bm)) continue;  // would be cyclic

          // ---- build the fused graph ----
          auto ng = clone_graph(cur);
          Graph& n = *ng;
          Statement& na = n.stmts_mut()[a_idx];
          Statement& nb = n.stmts_mut()[b_idx];

          Substitution sub;
          sub.map.emplace(B.def.loop->index_var,
                          Expr::symbol(A.def.loop->index_var, SemType::i64()));
          bool contracted = false;
          for (int32_t r : redirects) {
            SymId produced_out = cur.stmts()[r].def.args[0].sym;
            for (const LoopElem& el : A.def.loop->elems) {
              if (el.out == produced_out) {
                sub.map.emplace(cur.stmts()[r].sym,
                                cur.block(el.elem).result);
                contracted = true;
              }
            }
          }

          // migrate B's elem blocks under A's body scope
          for (LoopElem& el : nb.def.loop->elems) {
            for (BlockId mb : {el.elem, el.cond, el.combine}) {
              if (mb == kNoBlock) continue;
              n.block_mut(mb).parent = na.def.loop->body_scope;
              n.block_mut(mb).owner = na.sym;
            }
            na.def.loop->elems.push_back(el);
          }
          for (const LoopElem& el : nb.def.loop->elems)
            n.remap_sym(el.out, cur.stmt_index(na.sym));

          na.eff = and_then(na.eff, nb.eff);
          na.alias.contains.merge(nb.alias.contains);
          nb.erased = true;

          apply_substitution(n, sub);

          bool conditioned = false;
          for (const LoopElem& el : na.def.loop->elems)
            if (el.has_cond()) conditioned = true;
          if (contracted && conditioned)
            out.notes.push_back(
                "fused x" + std::to_string(A.sym) + " with x" +
                std::to_string(B.sym) +
                ": contraction combined with predicated elements");

          out.graph = std::move(ng);
          out.fused_pairs++;
          changed = true;
        }
      }
      if (changed) break;
    }
  }
  return out;
}

}  // namespace stagekit
