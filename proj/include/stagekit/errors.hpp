#pragma once

#include <stdexcept>
#include <string>

namespace stagekit {

// Errors raised while a DSL program is being staged or verified. These
// reject the program as ill-formed; the CLI maps them to exit code 2.
struct StagingError : std::runtime_error {
  enum class Kind {
    TypeMismatch,
    BranchTypeMismatch,
    WriteToImmutable,
    IllegalSharing,
    UnknownField,
    RecordShapeMismatch,
    RecordResidualized,
    GenerationFailed,
    CyclicDependency,
    ContractionBlocked,
  };

  Kind kind;

  StagingError(Kind k, const std::string& msg)
      : std::runtime_error(kind_name(k) + ": " + msg), kind(k) {}

  static std::string kind_name(Kind k) {
    switch (k) {
      case Kind::TypeMismatch: return "TypeMismatch";
      case Kind::BranchTypeMismatch: return "BranchTypeMismatch";
      case Kind::WriteToImmutable: return "WriteToImmutable";
      case Kind::IllegalSharing: return "IllegalSharing";
      case Kind::UnknownField: return "UnknownField";
      case Kind::RecordShapeMismatch: return "RecordShapeMismatch";
      case Kind::RecordResidualized: return "RecordResidualized";
      case Kind::GenerationFailed: return "GenerationFailed";
      case Kind::CyclicDependency: return "CyclicDependency";
      case Kind::ContractionBlocked: return "ContractionBlocked";
    }
    return "StagingError";
  }
};

// Runtime traps raised by generated-program execution. CLI exit code 3.
struct TrapError : std::runtime_error {
  enum class Kind {
    DivByZero,
    IndexOutOfBounds,
    ContractViolation,
  };

  Kind kind;

  TrapError(Kind k, const std::string& msg)
      : std::runtime_error(kind_name(k) + ": " + msg), kind(k) {}

  static std::string kind_name(Kind k) {
    switch (k) {
      case Kind::DivByZero: return "TrapDivByZero";
      case Kind::IndexOutOfBounds: return "TrapIndexOutOfBounds";
      case Kind::ContractViolation: return "ContractViolation";
    }
    return "TrapError";
  }
};

[[noreturn]] inline void type_error(const std::string& msg) {
  throw StagingError(StagingError::Kind::TypeMismatch, msg);
}

}  // namespace stagekit
