#pragma once

#include <unordered_map>
#include <vector>

#include "stagekit/graph.hpp"

namespace stagekit {

// Dependency-driven schedule: which statements are emitted, in which block,
// in what order. Computing it performs dead code elimination (only
// statements needed by the root result or reachable from live effects lists
// survive) and, optionally, code motion.
struct Schedule {
  std::vector<char> live;            // by stmt index
  std::vector<BlockId> placement;    // by stmt index; kNoBlock if dead
  std::vector<char> block_live;      // by block id
  std::unordered_map<BlockId, std::vector<int32_t>> per_block;
  std::unordered_map<int32_t, std::vector<char>> live_elems;  // loops
  // every symbol referenced inside a statement's live subtree
  std::unordered_map<int32_t, SymSet> full_refs;

  bool is_live(int32_t idx) const {
    return idx >= 0 && idx < static_cast<int32_t>(live.size()) && live[idx];
  }
  const std::vector<int32_t>& block_stmts(BlockId b) const {
    static const std::vector<int32_t> empty;
    auto it = per_block.find(b);
    return it == per_block.end() ? empty : it->second;
  }
  bool elem_live(int32_t stmt_idx, size_t elem_idx) const {
    auto it = live_elems.find(stmt_idx);
    if (it == live_elems.end()) return true;
    return elem_idx < it->second.size() && it->second[elem_idx];
  }
};

struct ScheduleOptions {
  bool dce{true};
  bool motion{true};
};

Schedule build_schedule(const Graph& g, ScheduleOptions opts = {});

// Pre-order walk of all scheduled statements (root block first, nested
// blocks of each compound statement immediately after it).
std::vector<int32_t> scheduled_preorder(const Graph& g, const Schedule& s);

// Statement indices in scheduled order for one block only.
// (block_stmts already gives this; helper kept for symmetry.)

// Checks the schedule invariants: every operand is a constant, a bound
// variable in scope, or scheduled earlier; effects keep reflection order.
// Throws StagingError(CyclicDependency) on violations.
void validate_schedule(const Graph& g, const Schedule& s);

// External symbols a scheduled statement consumes (its free inputs).
SymSet stmt_inputs(const Graph& g, const Schedule& s, int32_t idx);

}  // namespace stagekit
