#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "stagekit/errors.hpp"
#include "stagekit/expr.hpp"

namespace stagekit {

struct VecData;
struct RecData;
struct Value;
using VecPtr = std::shared_ptr<VecData>;
using RecPtr = std::shared_ptr<RecData>;
using CellPtr = std::shared_ptr<Value>;  // mutable variable cell

struct Value {
  std::variant<std::monostate, int64_t, double, bool, std::string, VecPtr,
               RecPtr, CellPtr>
      v;

  Value() = default;
  Value(int64_t x) : v(x) {}
  Value(double x) : v(x) {}
  Value(bool x) : v(x) {}
  Value(std::string x) : v(std::move(x)) {}
  Value(VecPtr x) : v(std::move(x)) {}
  Value(RecPtr x) : v(std::move(x)) {}
  Value(CellPtr x) : v(std::move(x)) {}

  bool is_unit() const { return std::holds_alternative<std::monostate>(v); }
  int64_t i() const { return std::get<int64_t>(v); }
  double d() const { return std::get<double>(v); }
  bool b() const { return std::get<bool>(v); }
  const std::string& s() const { return std::get<std::string>(v); }
  const VecPtr& vec() const { return std::get<VecPtr>(v); }
  const RecPtr& rec() const { return std::get<RecPtr>(v); }
  const CellPtr& cell() const { return std::get<CellPtr>(v); }
  bool is_vec() const { return std::holds_alternative<VecPtr>(v); }
  bool is_rec() const { return std::holds_alternative<RecPtr>(v); }
  bool is_cell() const { return std::holds_alternative<CellPtr>(v); }
};

// Typed vector storage; Any covers nested vectors, strings and records.
struct VecData {
  enum class Elem : uint8_t { I64, F64, Bool, Any };
  Elem kind{Elem::F64};
  std::vector<int64_t> iv;
  std::vector<double> dv;
  std::vector<uint8_t> bv;
  std::vector<Value> av;

  static VecPtr make(Elem k, size_t n = 0);

  size_t size() const {
    switch (kind) {
      case Elem::I64: return iv.size();
      case Elem::F64: return dv.size();
      case Elem::Bool: return bv.size();
      case Elem::Any: return av.size();
    }
    return 0;
  }
  Value get(size_t i) const;
  void set(size_t i, const Value& x);
  void push(const Value& x);
  void check_index(int64_t i, const char* what) const;
};

struct RecData {
  std::string tag;
  std::vector<std::pair<std::string, Value>> fields;

  const Value* field(const std::string& name) const {
    for (auto& [n, v] : fields)
      if (n == name) return &v;
    return nullptr;
  }
};

// Seedable linear congruential generator; high 53 bits map to [0,1).
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  double next_unit() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  int64_t next_int(int64_t bound) {
    return static_cast<int64_t>(next_unit() * static_cast<double>(bound));
  }
};

std::string format_value(const Value& v);

struct RunResult {
  std::string output;
  Value result;
};

}  // namespace stagekit
