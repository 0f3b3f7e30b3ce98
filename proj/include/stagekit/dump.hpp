#pragma once

#include <string>

#include "stagekit/schedule.hpp"

namespace stagekit {

// One line per statement, `x3 = Plus(x1, x2) [Pure]`, nested blocks
// indented. Stable across runs for the same program.
std::string dump_schedule(const Graph& g, const Schedule& s);

// Statement-table dump in construction order (pre-optimization view).
std::string dump_graph(const Graph& g);

}  // namespace stagekit
