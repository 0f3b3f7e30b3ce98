#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "stagekit/types.hpp"

namespace stagekit {

using SymId = int32_t;
constexpr SymId kNoSym = -1;

// Literal payload of a Const. monostate stands for the unit value.
struct Lit {
  std::variant<std::monostate, int64_t, double, bool, std::string> v;

  Lit() = default;
  explicit Lit(int64_t x) : v(x) {}
  explicit Lit(double x) : v(x) {}
  explicit Lit(bool x) : v(x) {}
  explicit Lit(std::string x) : v(std::move(x)) {}

  bool is_unit() const { return std::holds_alternative<std::monostate>(v); }
  bool is_int() const { return std::holds_alternative<int64_t>(v); }
  bool is_double() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_str() const { return std::holds_alternative<std::string>(v); }

  int64_t i() const { return std::get<int64_t>(v); }
  double d() const { return std::get<double>(v); }
  bool b() const { return std::get<bool>(v); }
  const std::string& s() const { return std::get<std::string>(v); }

  bool operator==(const Lit& o) const {
    if (v.index() != o.v.index()) return false;
    if (is_double()) {
      // bit equality so that 0.0 and -0.0 key differently in the CSE table
      return std::bit_cast<uint64_t>(d()) == std::bit_cast<uint64_t>(o.d());
    }
    return v == o.v;
  }

  size_t hash() const {
    size_t h = v.index();
    if (is_int()) h ^= std::hash<int64_t>{}(i());
    if (is_double()) h ^= std::hash<uint64_t>{}(std::bit_cast<uint64_t>(d()));
    if (is_bool()) h ^= b() ? 0x5bd1e995 : 0xc2b2ae35;
    if (is_str()) h ^= std::hash<std::string>{}(s());
    return h * 0x9e3779b97f4a7c15ull;
  }

  std::string to_string() const;
};

// Atomic staged value: either a literal constant or a numbered symbol bound
// to a definition in the owning graph.
struct Expr {
  enum class K : uint8_t { Const, Sym };

  K k{K::Const};
  SemType ty{SemType::unit()};
  Lit lit;
  SymId sym{kNoSym};

  static Expr constant(Lit l, SemType ty) {
    Expr e;
    e.k = K::Const;
    e.lit = std::move(l);
    e.ty = std::move(ty);
    return e;
  }
  static Expr of_int(int64_t x) { return constant(Lit(x), SemType::i64()); }
  static Expr of_double(double x) { return constant(Lit(x), SemType::f64()); }
  static Expr of_bool(bool x) { return constant(Lit(x), SemType::boolean()); }
  static Expr of_str(std::string x) {
    return constant(Lit(std::move(x)), SemType::str());
  }
  static Expr unit() { return constant(Lit(), SemType::unit()); }

  static Expr symbol(SymId s, SemType ty) {
    Expr e;
    e.k = K::Sym;
    e.sym = s;
    e.ty = std::move(ty);
    return e;
  }

  bool is_const() const { return k == K::Const; }
  bool is_sym() const { return k == K::Sym; }
  bool is_unit_const() const { return is_const() && lit.is_unit(); }

  // Structural equality: Const compares literal + type, Sym compares id.
  bool same(const Expr& o) const {
    if (k != o.k) return false;
    if (k == K::Sym) return sym == o.sym;
    return lit == o.lit && ty == o.ty;
  }

  size_t hash() const {
    if (k == K::Sym) return 0x517cc1b7ull * static_cast<size_t>(sym + 2);
    return lit.hash() ^ ty.hash();
  }

  std::string to_string() const;
};

// Shortest round-trip formatting for doubles; shared by dumps, codegen and
// both execution paths so printed output is byte-identical everywhere.
std::string format_double(double x);
std::string format_lit(const Lit& l);

}  // namespace stagekit
