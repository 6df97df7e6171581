#pragma once

#include <stdexcept>
#include <string>

namespace gasolve {

enum class ErrorKind {
  Argument,
  Range,
  State,
  Unsupported,
  Infeasible,
  Degenerate,
  Config,
  Io,
  Version,
  Length,
  UnknownArray,
  Parse,
  NotFinite,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so the C boundary
/// can map it onto a stable error code.
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

}  // namespace gasolve
