#pragma once

#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stagekit/effects.hpp"
#include "stagekit/errors.hpp"
#include "stagekit/node.hpp"

namespace stagekit {

// Reified scope: result expression plus the ordered list of statements whose
// effects are observable in this scope. `bound` are symbols (loop indexes,
// reduction operands) owned by the scope and visible only inside it.
struct BlockData {
  Expr result{Expr::unit()};
  std::vector<SymId> effects;
  std::vector<SymId> bound;
  BlockId parent{kNoBlock};
  SymId owner{kNoSym};
  EffectSummary summary;  // and_then-fold of statements staged in this scope
  bool closed{false};
};

struct Statement {
  SymId sym{kNoSym};
  Node def{Op::Plus};
  EffectSummary eff;
  AliasInfo alias;
  SemType ty{SemType::unit()};
  BlockId birth{kNoBlock};
  SymSet reach_mut;   // mutable allocations reachable from the result value
  bool erased{false}; // tombstoned by a graph-to-graph transform

  bool is_loop() const { return def.op == Op::ParallelLoop; }
};

// The statement table plus staging context. Statements are append-only; the
// optimizer passes produce new Graph values instead of mutating in place.
class Graph {
public:
  Graph() = default;

  bool cse_enabled{true};
  bool fast_math{false};

  // --- staging -----------------------------------------------------------

  // Bind a definition to an atom. Constant-foldable nodes with literal
  // operands never touch the table; structurally equal pure definitions are
  // deduplicated. Nodes whose operands reach mutable allocations pick up
  // implicit reads and are appended as read-effect statements (not CSE'd).
  Expr atom(Node def, SemType ty, AliasInfo alias = {},
            EffectSummary extra = {});

  // Append an effectful statement with the given summary. Never CSE'd; if
  // the summary is observable the statement joins the current scope's
  // effects list.
  Expr reflect(Node def, SemType ty, EffectSummary eff, AliasInfo alias = {});

  Expr reflect_mutable(Node def, SemType ty, AliasInfo alias = {});
  Expr reflect_ordered(Node def, SemType ty, AliasInfo alias = {});
  Expr reflect_write(Expr target, Node def, SemType ty, AliasInfo alias = {});

  // Scope management. `reify` runs the body in a fresh scope and returns the
  // closed block id; nesting is legal and required for control flow bodies.
  BlockId open_scope(std::vector<SymId> bound = {},
                     BlockId parent_override = kNoBlock);
  BlockId close_scope(Expr result);
  BlockId reify(const std::function<Expr()>& body,
                std::vector<SymId> bound = {},
                BlockId parent_override = kNoBlock);

  // A block allocated without becoming a staging scope (loop body scopes).
  BlockId make_block(std::vector<SymId> bound, BlockId parent);

  BlockId current_block() const {
    return scopes_.empty() ? kNoBlock : scopes_.back().block;
  }

  SymId fresh_bound(SemType ty);

  // --- queries -----------------------------------------------------------

  const Statement* find(SymId s) const {
    auto it = sym_index_.find(s);
    return it == sym_index_.end() ? nullptr : &stmts_[it->second];
  }
  Statement* find(SymId s) {
    auto it = sym_index_.find(s);
    return it == sym_index_.end() ? nullptr : &stmts_[it->second];
  }
  int32_t stmt_index(SymId s) const {
    auto it = sym_index_.find(s);
    return it == sym_index_.end() ? -1 : it->second;
  }
  // Definition of a symbol-valued expression, or null (consts, bound vars).
  const Node* def_of(const Expr& e) const {
    if (!e.is_sym()) return nullptr;
    const Statement* st = find(e.sym);
    return st ? &st->def : nullptr;
  }

  bool is_bound(SymId s) const { return bound_syms_.count(s) > 0; }
  bool is_mutable_alloc(SymId s) const {
    const Statement* st = find(s);
    return st && st->eff.allocates_mutable;
  }
  SemType type_of(const Expr& e) const { return e.ty; }

  // Mutable allocations reachable from the value of an expression.
  SymSet value_reach(const Expr& e) const;
  // Mutable allocations an expression may alias directly (write targets).
  SymSet alias_targets(const Expr& e) const;

  EffectSummary block_summary(BlockId b) const { return blocks_[b].summary; }

  const std::vector<Statement>& stmts() const { return stmts_; }
  std::vector<Statement>& stmts_mut() { return stmts_; }
  const BlockData& block(BlockId b) const { return blocks_[b]; }
  BlockData& block_mut(BlockId b) { return blocks_[b]; }
  size_t block_count() const { return blocks_.size(); }
  BlockId root() const { return root_; }
  SymId next_sym() const { return next_sym_; }

  BlockId bound_home(SymId s) const {
    auto it = bound_home_.find(s);
    return it == bound_home_.end() ? kNoBlock : it->second;
  }
  SemType bound_type(SymId s) const { return bound_ty_.at(s); }

  // Blocks b and maybe-ancestor a: walks parent links.
  bool is_ancestor_or_self(BlockId a, BlockId b) const;
  int block_depth(BlockId b) const;

  bool alloc_ever_written(SymId s) const {
    return written_allocs_.contains(s);
  }

  // --- lifecycle ---------------------------------------------------------

  void begin_program();      // opens the root scope
  void end_program(Expr result);
  void freeze();
  bool frozen() const { return frozen_; }

  // Re-registers a symbol to point at another statement slot (fusion).
  void remap_sym(SymId s, int32_t stmt_idx) { sym_index_[s] = stmt_idx; }
  void register_bound(SymId s, SemType ty, BlockId home);

private:
  struct Scope {
    BlockId block;
    std::vector<SymId> effects;
    std::vector<SymId> staged_effectful;  // every non-pure stmt, in order
  };

  Expr append_stmt(Node def, SemType ty, EffectSummary eff, AliasInfo alias);
  SymSet implicit_reads(const Node& def) const;
  void check_sharing(const Node& def, const EffectSummary& eff,
                     const AliasInfo& alias, const SymSet& reach) const;
  SemType typecheck(const Node& def, const SemType& expected) const;
  std::optional<Expr> fold(const Node& def) const;

  std::vector<Statement> stmts_;
  std::vector<BlockData> blocks_;
  std::unordered_map<SymId, int32_t> sym_index_;
  std::unordered_map<Node, SymId, NodeHash> cse_;
  std::vector<Scope> scopes_;
  std::unordered_set<SymId> bound_syms_;
  std::unordered_map<SymId, BlockId> bound_home_;
  std::unordered_map<SymId, SemType> bound_ty_;
  SymSet written_allocs_;
  SymId next_sym_{0};
  BlockId root_{kNoBlock};
  bool frozen_{false};
};

}  // namespace stagekit
