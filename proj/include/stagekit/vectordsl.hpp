#pragma once

#include <vector>

#include "stagekit/loops.hpp"
#include "stagekit/stage.hpp"

namespace stagekit {

// --- vector sources --------------------------------------------------------

// Uniform doubles in [0,1) from the seeded run-time generator; a unique
// allocation, never value-numbered.
DVec vec_rand(Stage& st, DInt n);
// Uniform integers in [0, bound).
DVec vec_rand_int(Stage& st, DInt n, DInt bound);
// Immutable literal vectors.
DVec vec_of(Stage& st, const std::vector<int64_t>& xs);
DVec vec_of(Stage& st, const std::vector<double>& xs);
// Mutable zero-initialized vector the program may update.
DVec vec_alloc(Stage& st, DInt n, SemType elem);

// --- library-level statistics (compose over sum loops) ----------------------
DDouble mean(Stage& st, DVec x);
DDouble variance(Stage& st, DVec x);

// --- the three-tier extension story ----------------------------------------
// Tier selection happens at Stage construction (install_tier_hooks); these
// entry points consult the rewrite registry first and fall through to the
// library implementation.
DVec vec_zeros(Stage& st, DInt n);
DVec scalar_times_vector(Stage& st, DDouble s, DVec v);
DVec vec_minus(Stage& st, DVec a, DVec b);
DDouble norm(Stage& st, DVec v);
DDouble dist(Stage& st, DVec a, DVec b);

void install_tier_hooks(Stage& st);

// Effectful bulk update: v[idxs[j]] = value for every j.
void bulk_update(Stage& st, DVec v, DVec idxs, DVal value);

}  // namespace stagekit
