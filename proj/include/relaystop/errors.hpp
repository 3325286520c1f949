#pragma once

#include <stdexcept>
#include <string>

namespace relaystop {

enum class ErrorKind {
  InvalidParameter,
  InvalidState,
  NonTerminatingContention,
  SolverFailure,
  InvalidPolicy,
  InsufficientData,
  CappedPacket,
  Config,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind lets
/// callers (the CLI in particular) map failures onto exit codes without
/// string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace relaystop
