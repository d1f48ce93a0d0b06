#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace typeiii {

enum class ErrorKind {
  InvalidArgument,
  ConstraintViolation,
  LedgerExhausted,
  InsufficientWindow,
  WindowTooLarge,
  NotLambdaPower,
  PropertyStarRange,
  CountOutOfRange,
  CylinderShape,
  NullSet,
  Infeasible,
  Representability,
  NonIncreasingK,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::ConstraintViolation: return "constraint violation";
    case ErrorKind::LedgerExhausted: return "ledger exhausted";
    case ErrorKind::InsufficientWindow: return "insufficient window";
    case ErrorKind::WindowTooLarge: return "window too large for enumeration";
    case ErrorKind::NotLambdaPower: return "not a lambda_t power";
    case ErrorKind::PropertyStarRange: return "Property * range violated";
    case ErrorKind::CountOutOfRange: return "count out of range";
    case ErrorKind::CylinderShape: return "cylinder shape";
    case ErrorKind::NullSet: return "null set";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Representability: return "not representable";
    case ErrorKind::NonIncreasingK: return "non-increasing k";
  }
  return "error";
}

/// Every failure raised by the library. `what()` starts with the kind label so
/// CLI users see e.g. "ledger exhausted: ...".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the ledger does not reach far enough; carries the first level
/// that would be needed.
class LedgerExhausted : public Error {
 public:
  LedgerExhausted(int needed_level, const std::string& detail)
      : Error(ErrorKind::LedgerExhausted,
              detail + " (needs level >= " + std::to_string(needed_level) + ")"),
        needed_level_(needed_level) {}

  int needed_level() const noexcept { return needed_level_; }

 private:
  int needed_level_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace typeiii
