#pragma once

#include <stdexcept>
#include <string>

namespace polyconsensus {

enum class ErrorKind {
  kSize,               // combinatorial size overflow
  kDimension,          // mismatched matrix / vector dimensions
  kInvalidArgument,    // precondition violated by a caller-supplied value
  kInternal,           // construction invariant broken (a bug)
  kNonConvergence,     // iterative method ran out of sweeps
  kIntervalContainsZero,
  kIo,
  kParse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSize: return "size";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInternal: return "internal";
    case ErrorKind::kNonConvergence: return "non-convergence";
    case ErrorKind::kIntervalContainsZero: return "interval-contains-zero";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
  }
  return "unknown";
}

/// Library exception. Every throw site in polyconsensus uses this type so that
/// callers (the CLI in particular) can map failures onto exit codes by kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

#define POLYCONSENSUS_THROW_UNLESS(cond, kind, msg)     \
  do {                                                  \
    if (!(cond)) throw ::polyconsensus::Error(kind, msg); \
  } while (false)

}  // namespace polyconsensus
