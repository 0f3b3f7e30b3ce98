#pragma once

#include "stagekit/minic.hpp"
#include "stagekit/runtime.hpp"

namespace stagekit {

// Reference sequential interpreter over the generated program; deterministic
// given the seed. The correctness oracle for the parallel executor.
RunResult interpret(const minic::Program& p, uint64_t seed);

}  // namespace stagekit
