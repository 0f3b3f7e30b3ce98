#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stagekit/stage.hpp"

namespace stagekit {

struct Schedule;

// Dynamic record creation. Pure, value-numbered.
DRec make_record(Stage& st, const std::string& tag,
                 const std::vector<std::pair<std::string, DVal>>& fields);

// Field access with partial evaluation: a visible record creation is looked
// through without adding a node; anything else residualizes.
DVal record_field(Stage& st, DVal rec, const std::string& name);

// Installs the conditional-splitting hook: a pure conditional whose branches
// both yield record creations becomes a record of per-field conditionals.
void install_record_hooks(Stage& st);

// Rejects any record or field-access statement surviving in the final
// schedule (strict mode); also rejects records stored in mutable variables.
void strict_record_check(const Graph& g, const Schedule& sched);

// Convenience constructors for the complex-number demos.
DRec make_complex(Stage& st, DDouble re, DDouble im);
DDouble complex_re(DRec c);
DDouble complex_im(DRec c);
DRec complex_add(DRec a, DRec b);
DRec complex_mul(DRec a, DRec b);
DRec complex_scale(DDouble s, DRec c);

}  // namespace stagekit
