#include "stagekit/dump.hpp"

#include <sstream>

namespace stagekit {

namespace {

std::string stmt_head(const Graph& g, const Statement& st,
                      const std::vector<char>* elem_mask) {
  std::ostringstream os;
  if (st.def.loop && st.def.loop->elems.size() > 1) {
    bool first = true;
    for (size_t k = 0; k < st.def.loop->elems.size(); ++k) {
      if (elem_mask && k < elem_mask->size() && !(*elem_mask)[k]) continue;
      os << (first ? "" : ", ") << "x" << st.def.loop->elems[k].out;
      first = false;
    }
  } else {
    os << "x" << st.sym;
  }
  os << " = " << op_name(st.def.op) << "(";
  bool first = true;
  for (const Expr& a : st.def.args) {
    os << (first ? "" : ", ") << a.to_string();
    first = false;
  }
  if (st.def.loop) {
    os << (first ? "" : ", ") << "range=" << st.def.loop->range.to_string()
       << ", i=x" << st.def.loop->index_var;
    first = false;
  }
  if (st.def.op == Op::Record) {
    os << ")[" << st.def.str << "]";
  } else if (st.def.op == Op::FieldAccess) {
    os << ")." << st.def.str;
  } else if (st.def.op == Op::VectorLiteral) {
    for (const Lit& l : st.def.lits) {
      os << (first ? "" : ", ") << format_lit(l);
      first = false;
    }
    os << ")";
  } else {
    os << ")";
  }
  os << " " << st.eff.to_string();
  return os.str();
}

struct Dumper {
  const Graph& g;
  const Schedule& s;
  std::ostringstream out;

  void line(int depth, const std::string& text) {
    for (int i = 0; i < depth; ++i) out << "  ";
    out << text << "\n";
  }

  void block(BlockId b, int depth, const std::string& label) {
    if (!label.empty()) line(depth, label + ":");
    for (int32_t idx : s.block_stmts(b)) stmt(idx, depth + 1);
    line(depth + 1, "=> " + g.block(b).result.to_string());
  }

  void stmt(int32_t idx, int depth) {
    const Statement& st = g.stmts()[idx];
    const std::vector<char>* mask = nullptr;
    auto it = s.live_elems.find(idx);
    if (it != s.live_elems.end()) mask = &it->second;
    line(depth, stmt_head(g, st, mask));
    if (st.def.op == Op::IfThenElse) {
      block(st.def.blocks[0], depth + 1, "then");
      block(st.def.blocks[1], depth + 1, "else");
    } else if (st.def.op == Op::While) {
      block(st.def.blocks[0], depth + 1, "cond");
      block(st.def.blocks[1], depth + 1, "body");
    } else if (st.def.loop) {
      // loop body scope preamble, then each live elem
      const auto& pre = s.block_stmts(st.def.loop->body_scope);
      if (!pre.empty()) {
        line(depth + 1, "shared:");
        for (int32_t p : pre) stmt(p, depth + 2);
      }
      for (size_t k = 0; k < st.def.loop->elems.size(); ++k) {
        if (mask && k < mask->size() && !(*mask)[k]) continue;
        const LoopElem& el = st.def.loop->elems[k];
        std::string kind = el.kind == LoopElem::K::Collect
                               ? (el.append ? "collect?" : "collect")
                               : el.kind == LoopElem::K::Reduce ? "reduce"
                                                                : "foreach";
        line(depth + 1, kind + " x" + std::to_string(el.out) + ":");
        if (el.cond != kNoBlock) block(el.cond, depth + 2, "cond");
        block(el.elem, depth + 2,
              el.kind == LoopElem::K::Foreach ? "body" : "elem");
        if (el.kind == LoopElem::K::Reduce) {
          line(depth + 2, "zero: " + el.zero.to_string() + "  rv=(x" +
                              std::to_string(el.rv_left) + ", x" +
                              std::to_string(el.rv_right) + ")");
          block(el.combine, depth + 2, "combine");
        }
      }
    }
  }

  std::string run() {
    for (int32_t idx : s.block_stmts(g.root())) stmt(idx, 0);
    line(0, "=> " + g.block(g.root()).result.to_string());
    return out.str();
  }
};

}  // namespace

std::string dump_schedule(const Graph& g, const Schedule& s) {
  Dumper d{g, s, {}};
  return d.run();
}

std::string dump_graph(const Graph& g) {
  std::ostringstream os;
  for (const Statement& st : g.stmts()) {
    if (st.erased) continue;
    os << stmt_head(g, st, nullptr);
    os << "  @b" << st.birth << "\n";
  }
  return os.str();
}

}  // namespace stagekit
