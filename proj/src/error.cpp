#include "ubkde/error.hpp"

namespace ubkde {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::config: return "config";
    case ErrorKind::usage: return "usage";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::model_inconsistency: return "model-inconsistency";
    case ErrorKind::invariant_violation: return "invariant-violation";
    case ErrorKind::window_not_valid: return "window-not-valid";
    case ErrorKind::degenerate_region: return "degenerate-region";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::accuracy:
    case ErrorKind::model_inconsistency:
    case ErrorKind::invariant_violation:
    case ErrorKind::io:
      return 3;
    default:
      return 2;
  }
}

}  // namespace ubkde
