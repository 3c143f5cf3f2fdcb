#include "gralis/error.hpp"

namespace gralis {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "configuration error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::capacity: return "capacity error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::rank_deficient: return "rank-deficiency error";
    case ErrorKind::witness_unavailable: return "witness unavailable";
    case ErrorKind::degenerate_model: return "degenerate model";
  }
  return "error";
}

}  // namespace gralis
