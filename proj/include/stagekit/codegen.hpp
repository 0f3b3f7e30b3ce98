#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stagekit/minic.hpp"
#include "stagekit/schedule.hpp"

namespace stagekit {

enum class KernelPattern { LoopCollect, LoopReduce, LoopForeach, SingleTask };

const char* kernel_pattern_name(KernelPattern p);

// One schedulable unit of the execution graph: a top-level statement plus
// its dependency interface.
struct Kernel {
  SymId id{kNoSym};
  int32_t stmt_idx{-1};
  KernelPattern pattern{KernelPattern::SingleTask};
  std::vector<SymId> inputs;
  std::vector<SymId> outputs;
  std::vector<SymId> anti_deps;  // ordering edges that carry no data
  std::string size;              // loops: rendered range expression
};

struct EmitCtx;
using Emitter = std::function<void(EmitCtx&, int32_t)>;

// Per-node-kind emitters; unknown kinds fail code generation.
struct EmitterRegistry {
  std::unordered_map<Op, Emitter> by_op;
};

EmitterRegistry default_emitters();

minic::Program emit_minic(const Graph& g, const Schedule& s,
                          const EmitterRegistry& reg);

std::vector<Kernel> build_kernels(const Graph& g, const Schedule& s);

std::string deg_to_json(const std::vector<Kernel>& kernels);

struct CodegenResult {
  minic::Program program;
  std::string minic_text;
  std::vector<Kernel> kernels;
  std::string deg_json;
};

CodegenResult run_codegen(const Graph& g, const Schedule& s);

// --- emission context (exposed for the per-op emitters) ---------------------

struct EmitCtx {
  const Graph& g;
  const Schedule& s;
  const EmitterRegistry& reg;
  std::unordered_map<SymId, minic::ExprPtr> env;
  std::vector<minic::StmtPtr>* out{nullptr};
  int rename_pass{0};

  std::string name_of(SymId sym) const {
    std::string n = "x" + std::to_string(sym);
    if (rename_pass > 0) n += "_r" + std::to_string(rename_pass);
    return n;
  }
  void push(minic::StmtPtr st) { out->push_back(std::move(st)); }

  minic::ExprPtr expr_of(const Expr& e);
  void bind(SymId sym, minic::ExprPtr e) { env[sym] = std::move(e); }

  void emit_stmt(int32_t idx);
  void emit_block(BlockId b);                 // statements only
  minic::ExprPtr emit_value_block(BlockId b); // statements, then result

  // Inline a block into a single expression (loop conditions); returns null
  // if the block contains anything but reads and pure scalar work.
  minic::ExprPtr block_as_expr(BlockId b);

  std::string minic_type(const SemType& t) const;
  minic::ExprPtr zero_of(const SemType& t) const;
};

}  // namespace stagekit
