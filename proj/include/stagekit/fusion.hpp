#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stagekit/schedule.hpp"

namespace stagekit {

struct FusionOutcome {
  std::shared_ptr<Graph> graph;
  int fused_pairs{0};
  std::vector<std::string> notes;
};

// Greedy fixed point: repeatedly fuse the earliest eligible pair of parallel
// loops in the same block (equal range, or the consumer iterating over a
// vector the producer creates) until no pair qualifies. Builds new graphs;
// the input graph is never mutated.
FusionOutcome fuse_loops(std::shared_ptr<Graph> g, bool with_motion = true);

// Consumer-side accesses of the producer's collect outputs. Returns the
// statement indices of the element loads to redirect; throws
// StagingError(ContractionBlocked) if the consumer indexes a produced vector
// with anything but the shared loop index.
std::vector<int32_t> contraction_applies(const Graph& g, const Schedule& s,
                                         int32_t consumer_idx,
                                         const SymSet& producer_outs,
                                         SymId consumer_index_var);

}  // namespace stagekit
