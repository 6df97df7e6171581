#include "gasolve/error.hpp"

namespace gasolve {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Range: return "range";
    case ErrorKind::State: return "state";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Version: return "version";
    case ErrorKind::Length: return "length";
    case ErrorKind::UnknownArray: return "unknown-array";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::NotFinite: return "not-finite";
  }
  return "unknown";
}

}  // namespace gasolve
