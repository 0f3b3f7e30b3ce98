#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "stagekit/expr.hpp"

namespace stagekit {

// Small sorted set of symbol ids.
class SymSet {
public:
  SymSet() = default;
  SymSet(std::initializer_list<SymId> xs) {
    for (SymId x : xs) insert(x);
  }

  void insert(SymId s) {
    auto it = std::lower_bound(v_.begin(), v_.end(), s);
    if (it == v_.end() || *it != s) v_.insert(it, s);
  }
  void merge(const SymSet& o) {
    for (SymId s : o.v_) insert(s);
  }
  bool contains(SymId s) const {
    return std::binary_search(v_.begin(), v_.end(), s);
  }
  bool empty() const { return v_.empty(); }
  size_t size() const { return v_.size(); }
  bool intersects(const SymSet& o) const {
    auto a = v_.begin();
    auto b = o.v_.begin();
    while (a != v_.end() && b != o.v_.end()) {
      if (*a == *b) return true;
      (*a < *b) ? ++a : ++b;
    }
    return false;
  }
  static SymSet set_union(const SymSet& a, const SymSet& b) {
    SymSet r = a;
    r.merge(b);
    return r;
  }
  static SymSet set_intersect(const SymSet& a, const SymSet& b) {
    SymSet r;
    for (SymId s : a.v_)
      if (b.contains(s)) r.insert(s);
    return r;
  }

  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }
  bool operator==(const SymSet& o) const { return v_ == o.v_; }

  std::string to_string() const {
    std::string s = "{";
    for (size_t i = 0; i < v_.size(); ++i) {
      if (i) s += ",";
      s += "x" + std::to_string(v_[i]);
    }
    return s + "}";
  }

private:
  std::vector<SymId> v_;
};

enum class EffKind : uint8_t { Pure, Simple, Global };

inline EffKind max_kind(EffKind a, EffKind b) { return a > b ? a : b; }

// Per-statement effect description. `ordered` marks opaque observable
// effects (console output) which must keep their program order relative to
// each other. `allocates_mutable` marks unique mutable allocations.
struct EffectSummary {
  EffKind kind{EffKind::Pure};
  SymSet may_read, must_read, may_write, must_write;
  bool allocates_mutable{false};
  bool ordered{false};

  static EffectSummary pure() { return {}; }
  static EffectSummary opaque() {
    EffectSummary e;
    e.kind = EffKind::Simple;
    e.ordered = true;
    return e;
  }
  static EffectSummary alloc() {
    EffectSummary e;
    e.kind = EffKind::Simple;
    e.allocates_mutable = true;
    return e;
  }
  static EffectSummary reads(SymSet rs) {
    EffectSummary e;
    if (!rs.empty()) e.kind = EffKind::Simple;
    e.may_read = rs;
    e.must_read = std::move(rs);
    return e;
  }
  static EffectSummary writes(SymSet may, SymSet must) {
    EffectSummary e;
    e.kind = EffKind::Simple;
    e.may_write = std::move(may);
    e.must_write = std::move(must);
    return e;
  }

  bool is_pure() const { return kind == EffKind::Pure; }
  bool has_writes() const { return !may_write.empty(); }
  bool has_reads() const { return !may_read.empty(); }

  // Statements whose order within a block is observable; these make up the
  // block effects list and are roots for dead code elimination.
  bool tracked_in_block() const {
    return ordered || has_writes() || kind == EffKind::Global;
  }

  // Statements code motion may relocate: no writes, no opaque effects, no
  // allocation. Reads are handled separately (only unwritten allocations).
  bool relocatable() const {
    return !tracked_in_block() && !allocates_mutable;
  }

  // Sequencing: a happens, then b.
  friend EffectSummary and_then(const EffectSummary& a,
                                const EffectSummary& b) {
    EffectSummary r;
    r.kind = max_kind(a.kind, b.kind);
    r.may_read = SymSet::set_union(a.may_read, b.may_read);
    r.must_read = SymSet::set_union(a.must_read, b.must_read);
    r.may_write = SymSet::set_union(a.may_write, b.may_write);
    r.must_write = SymSet::set_union(a.must_write, b.must_write);
    r.allocates_mutable = a.allocates_mutable || b.allocates_mutable;
    r.ordered = a.ordered || b.ordered;
    return r;
  }

  // Alternative branches: exactly one of a, b happens.
  friend EffectSummary or_else(const EffectSummary& a,
                               const EffectSummary& b) {
    EffectSummary r;
    r.kind = max_kind(a.kind, b.kind);
    r.may_read = SymSet::set_union(a.may_read, b.may_read);
    r.must_read = SymSet::set_intersect(a.must_read, b.must_read);
    r.may_write = SymSet::set_union(a.may_write, b.may_write);
    r.must_write = SymSet::set_intersect(a.must_write, b.must_write);
    r.allocates_mutable = a.allocates_mutable && b.allocates_mutable;
    r.ordered = a.ordered || b.ordered;
    return r;
  }

  // A body that may run zero or more times: keep may-sets, drop must-sets.
  EffectSummary widened_to_may() const {
    EffectSummary r = *this;
    r.may_read = SymSet::set_union(may_read, must_read);
    r.may_write = SymSet::set_union(may_write, must_write);
    r.must_read = {};
    r.must_write = {};
    r.allocates_mutable = false;
    return r;
  }

  std::string to_string() const;
};

// Declared pointer relations from a statement's result to its operands.
struct AliasInfo {
  SymSet aliases;       // x = y
  SymSet contains;      // *x = y
  SymSet extracts_from; // x = *y
  SymSet copies_from;   // *x = *y

  bool empty() const {
    return aliases.empty() && contains.empty() && extracts_from.empty() &&
           copies_from.empty();
  }
};

}  // namespace stagekit
