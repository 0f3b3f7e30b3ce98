#pragma once

#include <functional>
#include <optional>

#include "stagekit/stage.hpp"

namespace stagekit {

// Structured parallel loop constructors. The runtime executes the body
// exactly once per index in [0, range) with no order guarantee.

// Dense collect (map-style). If the element is a record creation, the loop
// is lowered to one collect per field and rebuilt as a record of vectors.
DVec mk_collect(Stage& st, DInt range, const std::function<DVal(DInt)>& elem);

// Filter-style collect: appends elements for which `cond` holds.
DVec mk_filter_collect(Stage& st, DInt range,
                       const std::function<DBool(DInt)>& cond,
                       const std::function<DVal(DInt)>& elem);

// Reduction with an explicit identity element. `combine` must be
// associative (declared, not checked). Filtered-out indexes contribute the
// identity.
DVal mk_reduce(Stage& st, DInt range, DVal zero,
               const std::function<DVal(DInt)>& elem,
               const std::function<DVal(DVal, DVal)>& combine,
               const std::function<DBool(DInt)>* cond = nullptr);

// Effectful parallel traversal; writes are only safe at disjoint indexes.
void mk_foreach(Stage& st, DInt range, const std::function<void(DInt)>& body);

}  // namespace stagekit
