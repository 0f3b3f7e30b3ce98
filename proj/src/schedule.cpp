#include "stagekit/schedule.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <queue>
#include <set>

namespace stagekit {

namespace {

// Live child blocks of a statement, respecting elem liveness for loops.
template <typename F>
void for_child_blocks(const Graph& g, const Schedule& s, int32_t idx, F fn) {
  const Statement& st = g.stmts()[idx];
  for (BlockId b : st.def.blocks) fn(b);
  if (st.def.loop) {
    fn(st.def.loop->body_scope);
    const auto& elems = st.def.loop->elems;
    for (size_t k = 0; k < elems.size(); ++k) {
      if (!s.elem_live(idx, k)) continue;
      if (elems[k].elem != kNoBlock) fn(elems[k].elem);
      if (elems[k].cond != kNoBlock) fn(elems[k].cond);
      if (elems[k].combine != kNoBlock) fn(elems[k].combine);
    }
  }
}

struct Builder {
  const Graph& g;
  ScheduleOptions opts;
  Schedule s;

  // per stmt: which out symbols were demanded
  std::vector<char> effect_rooted;
  std::deque<int32_t> work;

  explicit Builder(const Graph& gr, ScheduleOptions o) : g(gr), opts(o) {
    s.live.assign(g.stmts().size(), 0);
    s.placement.assign(g.stmts().size(), kNoBlock);
    s.block_live.assign(g.block_count(), 0);
    effect_rooted.assign(g.stmts().size(), 0);
  }

  // --- liveness ------------------------------------------------------------

  int32_t index_of(SymId sym) const { return g.stmt_index(sym); }

  void mark_live(int32_t idx) {
    if (idx < 0 || s.live[idx]) return;
    s.live[idx] = 1;
    work.push_back(idx);
  }

  void demand_sym(SymId sym) {
    if (g.is_bound(sym)) return;
    int32_t idx = index_of(sym);
    if (idx < 0) return;
    const Statement& st = g.stmts()[idx];
    if (st.def.loop) {
      // statement-level liveness plus elem-level liveness
      auto& mask = s.live_elems[idx];
      if (mask.empty()) mask.assign(st.def.loop->elems.size(), 0);
      bool changed = false;
      for (size_t k = 0; k < st.def.loop->elems.size(); ++k) {
        if (st.def.loop->elems[k].out == sym && !mask[k]) {
          mask[k] = 1;
          changed = true;
        }
      }
      bool was_live = s.live[idx];
      mark_live(idx);
      if (changed && was_live) work.push_back(idx);  // process new elem
      return;
    }
    mark_live(idx);
  }

  void demand_expr(const Expr& e) {
    if (e.is_sym()) demand_sym(e.sym);
  }

  void demand_block(BlockId b) {
    const BlockData& bd = g.block(b);
    demand_expr(bd.result);
    for (SymId eff : bd.effects) {
      int32_t idx = index_of(eff);
      if (idx < 0) continue;
      effect_rooted[idx] = 1;
      if (g.stmts()[idx].def.loop) {
        // effect-rooted loop: every elem runs
        auto& mask = s.live_elems[idx];
        mask.assign(g.stmts()[idx].def.loop->elems.size(), 1);
      }
      mark_live(idx);
      work.push_back(idx);  // reprocess in case it was live already
    }
  }

  void process(int32_t idx) {
    const Statement& st = g.stmts()[idx];
    for (const Expr& a : st.def.args) demand_expr(a);
    for (BlockId b : st.def.blocks) demand_block(b);
    if (st.def.loop) {
      demand_expr(st.def.loop->range);
      auto& mask = s.live_elems[idx];
      if (mask.empty()) mask.assign(st.def.loop->elems.size(), 0);
      for (size_t k = 0; k < st.def.loop->elems.size(); ++k) {
        const LoopElem& el = st.def.loop->elems[k];
        if (el.kind == LoopElem::K::Foreach && effect_rooted[idx]) mask[k] = 1;
        if (!mask[k]) continue;
        if (el.elem != kNoBlock) demand_block(el.elem);
        if (el.cond != kNoBlock) demand_block(el.cond);
        if (el.combine != kNoBlock) demand_block(el.combine);
        if (el.kind == LoopElem::K::Reduce) demand_expr(el.zero);
      }
    }
  }

  void run_liveness() {
    demand_block(g.root());
    if (!opts.dce) {
      // keep everything staged in reachable blocks, dead or not
      bool changed = true;
      std::vector<char> blk(g.block_count(), 0);
      blk[g.root()] = 1;
      while (changed) {
        changed = false;
        for (size_t i = 0; i < g.stmts().size(); ++i) {
          const Statement& st = g.stmts()[i];
          if (st.erased || st.birth == kNoBlock || !blk[st.birth]) continue;
          if (!s.live[i]) {
            if (st.def.loop) {
              auto& mask = s.live_elems[i];
              mask.assign(st.def.loop->elems.size(), 1);
            }
            mark_live(static_cast<int32_t>(i));
            changed = true;
          }
          bool sub = false;
          for_child_blocks(g, s, static_cast<int32_t>(i), [&](BlockId b) {
            if (!blk[b]) {
              blk[b] = 1;
              sub = true;
            }
          });
          changed = changed || sub;
        }
      }
    }
    while (!work.empty()) {
      int32_t idx = work.front();
      work.pop_front();
      process(idx);
    }
    // drop erased statements regardless
    for (size_t i = 0; i < g.stmts().size(); ++i)
      if (g.stmts()[i].erased) s.live[i] = 0;
  }

  // --- block liveness ------------------------------------------------------

  void run_block_liveness() {
    s.block_live[g.root()] = 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < g.stmts().size(); ++i) {
        if (!s.live[i]) continue;
        for_child_blocks(g, s, static_cast<int32_t>(i), [&](BlockId b) {
          if (!s.block_live[b]) {
            s.block_live[b] = 1;
            changed = true;
          }
        });
      }
    }
  }

  // --- placement -----------------------------------------------------------

  bool movable(const Statement& st) const {
    if (!st.eff.relocatable()) return false;
    for (SymId r : st.eff.may_read)
      if (g.alloc_ever_written(r)) return false;
    return true;
  }

  // deeper of two blocks on one root path
  BlockId deeper(BlockId a, BlockId b) const {
    if (a == kNoBlock) return b;
    if (b == kNoBlock) return a;
    if (a == b) return a;
    if (g.is_ancestor_or_self(a, b)) return b;
    if (g.is_ancestor_or_self(b, a)) return a;
    throw StagingError(StagingError::Kind::CyclicDependency,
                       "statement depends on two unrelated scopes");
  }

  std::vector<BlockId> level_memo;
  std::vector<char> level_in_progress;

  bool inside_subtree(BlockId b, int32_t root_stmt) const {
    // is block b within root_stmt's own nested blocks?
    while (b != kNoBlock) {
      const BlockData& bd = g.block(b);
      if (bd.owner == g.stmts()[root_stmt].sym) return true;
      b = bd.parent;
    }
    return false;
  }

  // Deepest scope the dependency cone of `idx` pins it to.
  BlockId level_of(int32_t idx) {
    if (level_memo[idx] != -2) return level_memo[idx];
    if (level_in_progress[idx])
      throw StagingError(StagingError::Kind::CyclicDependency,
                         "cycle while placing x" +
                             std::to_string(g.stmts()[idx].sym));
    level_in_progress[idx] = 1;

    BlockId lvl = g.root();

    std::vector<SymId> refs;
    collect_direct_refs(idx, refs);
    std::set<SymId> seen;
    std::deque<SymId> q(refs.begin(), refs.end());
    while (!q.empty()) {
      SymId r = q.front();
      q.pop_front();
      if (!seen.insert(r).second) continue;
      if (g.is_bound(r)) {
        BlockId home = g.bound_home(r);
        if (home != kNoBlock && !inside_subtree(home, idx))
          lvl = deeper(lvl, home);
        continue;
      }
      int32_t ridx = index_of(r);
      if (ridx < 0 || !s.live[ridx]) continue;
      const Statement& rst = g.stmts()[ridx];
      bool internal = rst.birth != kNoBlock && inside_subtree(rst.birth, idx);
      if (!movable(rst)) {
        if (!internal) {
          lvl = deeper(lvl, pinned_home(ridx));
        }
        continue;  // pinned statements contribute their block, not their cone
      }
      // movable dependencies place themselves at or above our level; walk
      // through them to find the pinning leaves
      std::vector<SymId> sub;
      collect_direct_refs(ridx, sub);
      for (SymId x : sub) q.push_back(x);
    }

    level_in_progress[idx] = 0;
    level_memo[idx] = lvl;
    return lvl;
  }

  BlockId pinned_home(int32_t idx) const {
    return g.stmts()[idx].birth;
  }

  // Direct references of a statement including its live nested content.
  std::unordered_map<int32_t, std::vector<SymId>> direct_refs_memo;
  void collect_direct_refs(int32_t idx, std::vector<SymId>& out) {
    auto it = direct_refs_memo.find(idx);
    if (it != direct_refs_memo.end()) {
      out.insert(out.end(), it->second.begin(), it->second.end());
      return;
    }
    std::vector<SymId> refs;
    const Statement& st = g.stmts()[idx];
    auto add_expr = [&](const Expr& e) {
      if (e.is_sym()) refs.push_back(e.sym);
    };
    for (const Expr& a : st.def.args) add_expr(a);
    if (st.def.loop) {
      add_expr(st.def.loop->range);
      for (size_t k = 0; k < st.def.loop->elems.size(); ++k) {
        if (!s.elem_live(idx, k)) continue;
        add_expr(st.def.loop->elems[k].zero);
      }
    }
    for_child_blocks(g, s, idx, [&](BlockId b) {
      const BlockData& bd = g.block(b);
      add_expr(bd.result);
      for (SymId e : bd.effects) refs.push_back(e);
    });
    // statements born inside this statement's blocks contribute their refs
    for (int32_t ci : born_inside(idx)) {
      const Statement& cst = g.stmts()[ci];
      if (!s.live[ci]) continue;
      for (const Expr& a : cst.def.args) add_expr(a);
      if (cst.def.loop) {
        add_expr(cst.def.loop->range);
        for (auto& el : cst.def.loop->elems) add_expr(el.zero);
      }
    }
    direct_refs_memo[idx] = refs;
    out.insert(out.end(), refs.begin(), refs.end());
  }

  // statements whose birth block lies inside idx's nested blocks
  std::unordered_map<int32_t, std::vector<int32_t>> born_inside_memo;
  const std::vector<int32_t>& born_inside(int32_t idx) {
    auto it = born_inside_memo.find(idx);
    if (it != born_inside_memo.end()) return it->second;
    std::vector<int32_t> res;
    for (size_t i = 0; i < g.stmts().size(); ++i) {
      const Statement& st = g.stmts()[i];
      if (st.erased || st.birth == kNoBlock) continue;
      if (inside_subtree(st.birth, idx)) res.push_back(static_cast<int32_t>(i));
    }
    return born_inside_memo[idx] = std::move(res);
  }

  void run_placement() {
    level_memo.assign(g.stmts().size(), -2);
    level_in_progress.assign(g.stmts().size(), 0);
    for (size_t i = 0; i < g.stmts().size(); ++i) {
      if (!s.live[i]) continue;
      const Statement& st = g.stmts()[i];
      bool orphan = st.birth == kNoBlock || !s.block_live[st.birth];
      if (!movable(st)) {
        if (orphan)
          throw StagingError(StagingError::Kind::CyclicDependency,
                             "effectful statement x" + std::to_string(st.sym) +
                                 " is live but its scope is not");
        s.placement[i] = st.birth;
        continue;
      }
      if (opts.motion || orphan) {
        s.placement[i] = level_of(static_cast<int32_t>(i));
      } else {
        s.placement[i] = st.birth;
      }
    }
    if (opts.motion) run_sinking();
  }

  // --- sinking into conditional branches ------------------------------------

  enum class ChildKind { Forbidden, Branch, LoopPart };

  ChildKind child_kind(BlockId b) const {
    const BlockData& bd = g.block(b);
    if (bd.owner == kNoSym) return ChildKind::Forbidden;
    const Statement* owner = g.find(bd.owner);
    if (!owner) return ChildKind::Forbidden;
    if (owner->def.op == Op::IfThenElse) return ChildKind::Branch;
    if (owner->def.op == Op::ParallelLoop) {
      if (owner->def.loop && b == owner->def.loop->body_scope)
        return ChildKind::Forbidden;  // entering the loop itself
      return ChildKind::LoopPart;
    }
    return ChildKind::Forbidden;  // while bodies re-execute
  }

  void run_sinking() {
    // use sites: stmt -> blocks that reference it
    bool changed = true;
    int guard = 0;
    while (changed && guard++ < 64) {
      changed = false;
      std::unordered_map<SymId, std::vector<BlockId>> use_blocks;
      auto note_use = [&](SymId sym, BlockId where) {
        use_blocks[sym].push_back(where);
      };
      for (size_t i = 0; i < g.stmts().size(); ++i) {
        if (!s.live[i]) continue;
        const Statement& st = g.stmts()[i];
        BlockId here = s.placement[i];
        for (const Expr& a : st.def.args)
          if (a.is_sym()) note_use(a.sym, here);
        if (st.def.loop) {
          if (st.def.loop->range.is_sym())
            note_use(st.def.loop->range.sym, here);
          for (size_t k = 0; k < st.def.loop->elems.size(); ++k)
            if (s.elem_live(static_cast<int32_t>(i), k) &&
                st.def.loop->elems[k].zero.is_sym())
              note_use(st.def.loop->elems[k].zero.sym, here);
        }
      }
      for (size_t b = 0; b < g.block_count(); ++b) {
        if (!s.block_live[b]) continue;
        const BlockData& bd = g.block(static_cast<BlockId>(b));
        if (bd.result.is_sym())
          note_use(bd.result.sym, static_cast<BlockId>(b));
      }

      for (size_t i = 0; i < g.stmts().size(); ++i) {
        if (!s.live[i]) continue;
        const Statement& st = g.stmts()[i];
        if (!movable(st)) continue;
        auto it = use_blocks.find(st.sym);
        if (it == use_blocks.end()) continue;  // root result handled via block
        const std::vector<BlockId>& uses = it->second;
        if (uses.empty()) continue;
        BlockId cur = s.placement[i];
        // candidate: unique child step (of allowed kind) under cur that
        // contains every use
        BlockId step = kNoBlock;
        bool ok = true;
        for (BlockId u : uses) {
          // walk up from u to (just below) cur
          BlockId walk = u;
          BlockId below = kNoBlock;
          while (walk != kNoBlock && walk != cur) {
            below = walk;
            walk = g.block(walk).parent;
          }
          if (walk != cur || below == kNoBlock) {
            ok = false;  // use at cur itself or outside
            break;
          }
          if (step == kNoBlock) step = below;
          if (step != below) {
            ok = false;
            break;
          }
        }
        if (!ok || step == kNoBlock) continue;
        if (child_kind(step) == ChildKind::Forbidden) continue;
        if (!s.block_live[step]) continue;
        s.placement[i] = step;
        changed = true;
      }
    }
  }

  // --- ordering --------------------------------------------------------------

  void compute_full_refs() {
    // bottom-up over the block tree: full refs of a statement = direct refs
    // plus refs of everything placed inside its subtree
    std::vector<int32_t> order(g.stmts().size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int32_t>(i);
    std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
      BlockId pa = s.placement[a], pb = s.placement[b];
      int da = pa == kNoBlock ? 0 : g.block_depth(pa);
      int db = pb == kNoBlock ? 0 : g.block_depth(pb);
      return da > db;  // deepest first
    });
    for (int32_t idx : order) {
      if (!s.live[idx]) continue;
      SymSet refs;
      const Statement& st = g.stmts()[idx];
      auto add_expr = [&](const Expr& e) {
        if (e.is_sym()) refs.insert(e.sym);
      };
      for (const Expr& a : st.def.args) add_expr(a);
      if (st.def.loop) {
        add_expr(st.def.loop->range);
        for (size_t k = 0; k < st.def.loop->elems.size(); ++k)
          if (s.elem_live(idx, k)) add_expr(st.def.loop->elems[k].zero);
      }
      for_child_blocks(g, s, idx, [&](BlockId b) {
        const BlockData& bd = g.block(b);
        add_expr(bd.result);
        for (SymId e : bd.effects) refs.insert(e);
        for (int32_t member : s.block_stmts(b)) {
          refs.insert(g.stmts()[member].sym);
          auto mit = s.full_refs.find(member);
          if (mit != s.full_refs.end()) refs.merge(mit->second);
        }
      });
      s.full_refs[idx] = std::move(refs);
    }
  }

  void order_blocks() {
    // group members by placement
    for (size_t i = 0; i < g.stmts().size(); ++i)
      if (s.live[i]) s.per_block[s.placement[i]].push_back(static_cast<int32_t>(i));
    for (auto& [b, members] : s.per_block)
      std::sort(members.begin(), members.end());

    compute_full_refs();

    for (auto& [b, members] : s.per_block) order_one_block(b, members);
  }

  void order_one_block(BlockId b, std::vector<int32_t>& members) {
    size_t n = members.size();
    if (n <= 1) return;
    std::unordered_map<SymId, size_t> out_sym_to_member;
    for (size_t m = 0; m < n; ++m) {
      const Statement& st = g.stmts()[members[m]];
      out_sym_to_member[st.sym] = m;
      if (st.def.loop)
        for (size_t k = 0; k < st.def.loop->elems.size(); ++k)
          if (s.elem_live(members[m], k))
            out_sym_to_member[st.def.loop->elems[k].out] = m;
    }
    std::vector<std::vector<size_t>> succ(n);
    std::vector<int> indeg(n, 0);
    auto add_edge = [&](size_t from, size_t to) {
      if (from == to) return;
      succ[from].push_back(to);
      indeg[to]++;
    };
    // data edges
    for (size_t m = 0; m < n; ++m) {
      const SymSet& refs = s.full_refs[members[m]];
      for (SymId r : refs) {
        auto it = out_sym_to_member.find(r);
        if (it != out_sym_to_member.end()) add_edge(it->second, m);
      }
    }
    // read/write conflicts, program order
    for (size_t a = 0; a < n; ++a) {
      const EffectSummary& ea = g.stmts()[members[a]].eff;
      if (ea.may_read.empty() && ea.may_write.empty()) continue;
      for (size_t c = a + 1; c < n; ++c) {
        const EffectSummary& ec = g.stmts()[members[c]].eff;
        bool conflict = ea.may_write.intersects(ec.may_read) ||
                        ea.may_write.intersects(ec.may_write) ||
                        ea.may_read.intersects(ec.may_write);
        if (conflict) add_edge(a, c);
      }
    }
    // observable effects keep reflection order
    {
      const BlockData& bd = g.block(b);
      size_t prev = SIZE_MAX;
      for (SymId e : bd.effects) {
        auto it = out_sym_to_member.find(e);
        if (it == out_sym_to_member.end()) continue;
        if (!s.live[members[it->second]]) continue;
        if (prev != SIZE_MAX) add_edge(prev, it->second);
        prev = it->second;
      }
    }
    // deterministic Kahn: smallest statement index first
    std::priority_queue<size_t, std::vector<size_t>, std::greater<size_t>> q;
    for (size_t m = 0; m < n; ++m)
      if (indeg[m] == 0) q.push(m);
    std::vector<int32_t> result;
    result.reserve(n);
    while (!q.empty()) {
      size_t m = q.top();
      q.pop();
      result.push_back(members[m]);
      for (size_t nx : succ[m])
        if (--indeg[nx] == 0) q.push(nx);
    }
    if (result.size() != n)
      throw StagingError(StagingError::Kind::CyclicDependency,
                         "cyclic dependency while ordering a block");
    members = std::move(result);
  }

  Schedule build() {
    run_liveness();
    run_block_liveness();
    run_placement();
    order_blocks();
    return std::move(s);
  }
};

}  // namespace

Schedule build_schedule(const Graph& g, ScheduleOptions opts) {
  Builder b(g, opts);
  return b.build();
}

std::vector<int32_t> scheduled_preorder(const Graph& g, const Schedule& s) {
  std::vector<int32_t> out;
  std::function<void(BlockId)> walk_block = [&](BlockId b) {
    for (int32_t idx : s.block_stmts(b)) {
      out.push_back(idx);
      for_child_blocks(g, s, idx, [&](BlockId cb) { walk_block(cb); });
    }
  };
  walk_block(g.root());
  return out;
}

SymSet stmt_inputs(const Graph& g, const Schedule& s, int32_t idx) {
  auto it = s.full_refs.find(idx);
  if (it == s.full_refs.end()) return {};
  SymSet inputs;
  // internal out syms and internally-bound vars are not inputs
  const Statement& st = g.stmts()[idx];
  for (SymId r : it->second) {
    if (g.is_bound(r)) {
      BlockId home = g.bound_home(r);
      bool internal = false;
      while (home != kNoBlock) {
        if (g.block(home).owner == st.sym) {
          internal = true;
          break;
        }
        home = g.block(home).parent;
      }
      if (!internal) inputs.insert(r);
      continue;
    }
    int32_t ridx = g.stmt_index(r);
    if (ridx < 0 || !s.live[ridx]) continue;
    BlockId pl = s.placement[ridx];
    bool internal = false;
    while (pl != kNoBlock) {
      if (g.block(pl).owner == st.sym) {
        internal = true;
        break;
      }
      pl = g.block(pl).parent;
    }
    if (!internal) inputs.insert(r);
  }
  return inputs;
}

void validate_schedule(const Graph& g, const Schedule& s) {
  // scheduled-earlier map per block
  std::unordered_map<BlockId, std::unordered_map<SymId, size_t>> pos;
  for (auto& [b, members] : s.per_block) {
    for (size_t m = 0; m < members.size(); ++m) {
      const Statement& st = g.stmts()[members[m]];
      pos[b][st.sym] = m;
      if (st.def.loop)
        for (auto& el : st.def.loop->elems) pos[b][el.out] = m;
    }
  }
  auto visible = [&](SymId sym, BlockId from, size_t before_pos) {
    if (g.is_bound(sym)) {
      BlockId home = g.bound_home(sym);
      // bound symbol must be bound by an enclosing block
      BlockId w = from;
      while (w != kNoBlock) {
        if (w == home) return true;
        w = g.block(w).parent;
      }
      return false;
    }
    // defined in this block earlier, or anywhere in an enclosing block
    BlockId w = from;
    bool first = true;
    while (w != kNoBlock) {
      auto bit = pos.find(w);
      if (bit != pos.end()) {
        auto sit = bit->second.find(sym);
        if (sit != bit->second.end()) {
          if (!first) return true;
          return sit->second < before_pos;
        }
      }
      w = g.block(w).parent;
      first = false;
    }
    return false;
  };

  for (auto& [b, members] : s.per_block) {
    for (size_t m = 0; m < members.size(); ++m) {
      int32_t idx = members[m];
      SymSet inputs = stmt_inputs(g, s, idx);
      for (SymId r : inputs) {
        if (g.stmt_index(r) < 0 && !g.is_bound(r)) continue;
        if (!visible(r, b, m))
          throw StagingError(
              StagingError::Kind::CyclicDependency,
              "x" + std::to_string(r) + " not in scope for x" +
                  std::to_string(g.stmts()[idx].sym));
      }
    }
    // effects keep reflection order
    const BlockData& bd = g.block(b);
    size_t last = 0;
    bool have_last = false;
    for (SymId e : bd.effects) {
      auto bit = pos.find(b);
      if (bit == pos.end()) continue;
      auto sit = bit->second.find(e);
      if (sit == bit->second.end()) continue;
      if (have_last && sit->second < last)
        throw StagingError(StagingError::Kind::CyclicDependency,
                           "effect order violated in block " +
                               std::to_string(b));
      last = sit->second;
      have_last = true;
    }
  }
}

}  // namespace stagekit
