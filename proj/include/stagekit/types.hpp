#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace stagekit {

enum class Ty : uint8_t {
  Int,
  Double,
  Bool,
  Str,
  Unit,
  Vector,
  Record,
  Var,
};

// Semantic type tag carried by every expression. Vector/Var have one inner
// type, Record has a tag plus ordered named fields.
class SemType {
public:
  SemType() : kind_(Ty::Unit) {}

  static SemType i64() { return SemType(Ty::Int); }
  static SemType f64() { return SemType(Ty::Double); }
  static SemType boolean() { return SemType(Ty::Bool); }
  static SemType str() { return SemType(Ty::Str); }
  static SemType unit() { return SemType(Ty::Unit); }

  static SemType vec(SemType elem) {
    SemType t(Ty::Vector);
    t.sub_.push_back(std::move(elem));
    return t;
  }
  static SemType var(SemType inner) {
    SemType t(Ty::Var);
    t.sub_.push_back(std::move(inner));
    return t;
  }
  static SemType rec(std::string tag,
                     std::vector<std::pair<std::string, SemType>> fields) {
    SemType t(Ty::Record);
    t.tag_ = std::move(tag);
    t.fields_ = std::move(fields);
    return t;
  }

  Ty kind() const { return kind_; }
  bool is(Ty k) const { return kind_ == k; }
  bool numeric() const { return kind_ == Ty::Int || kind_ == Ty::Double; }

  const SemType& elem() const { return sub_.at(0); }   // Vector
  const SemType& inner() const { return sub_.at(0); }  // Var

  const std::string& tag() const { return tag_; }
  const std::vector<std::pair<std::string, SemType>>& fields() const {
    return fields_;
  }
  const SemType* field(const std::string& name) const {
    for (auto& [n, t] : fields_)
      if (n == name) return &t;
    return nullptr;
  }

  bool operator==(const SemType& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
      case Ty::Vector:
      case Ty::Var:
        return sub_[0] == o.sub_[0];
      case Ty::Record:
        return tag_ == o.tag_ && fields_ == o.fields_;
      default:
        return true;
    }
  }
  bool operator!=(const SemType& o) const { return !(*this == o); }

  size_t hash() const {
    size_t h = static_cast<size_t>(kind_) * 0x9e3779b97f4a7c15ull;
    if (kind_ == Ty::Vector || kind_ == Ty::Var) {
      h ^= sub_[0].hash() + 0x9e3779b9 + (h << 6) + (h >> 2);
    } else if (kind_ == Ty::Record) {
      h ^= std::hash<std::string>{}(tag_);
      for (auto& [n, t] : fields_) {
        h = h * 31 + std::hash<std::string>{}(n);
        h = h * 31 + t.hash();
      }
    }
    return h;
  }

  std::string to_string() const {
    switch (kind_) {
      case Ty::Int: return "Int";
      case Ty::Double: return "Double";
      case Ty::Bool: return "Bool";
      case Ty::Str: return "Str";
      case Ty::Unit: return "Unit";
      case Ty::Vector: return "Vector[" + sub_[0].to_string() + "]";
      case Ty::Var: return "Var[" + sub_[0].to_string() + "]";
      case Ty::Record: {
        std::string s = "Record[" + tag_;
        for (auto& [n, t] : fields_) s += " " + n + ":" + t.to_string();
        return s + "]";
      }
    }
    return "?";
  }

private:
  explicit SemType(Ty k) : kind_(k) {}

  Ty kind_;
  std::string tag_;
  std::vector<std::pair<std::string, SemType>> fields_;
  std::vector<SemType> sub_;
};

}  // namespace stagekit
