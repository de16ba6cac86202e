#include "sigtest/error.hpp"

namespace sigtest {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::degenerate_column: return "degenerate_column";
    case ErrorKind::singular_design: return "singular_design";
    case ErrorKind::duplicate_column: return "duplicate_column";
    case ErrorKind::missing_variance: return "missing_variance";
    case ErrorKind::not_estimable: return "not_estimable";
    case ErrorKind::degenerate_variance: return "degenerate_variance";
    case ErrorKind::stale_path: return "stale_path";
    case ErrorKind::path_too_short: return "path_too_short";
    case ErrorKind::unsupported_step: return "unsupported_step";
    case ErrorKind::too_few_remaining: return "too_few_remaining";
    case ErrorKind::domain: return "domain";
    case ErrorKind::separation: return "separation";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::no_events: return "no_events";
    case ErrorKind::unreliable_max: return "unreliable_max";
    case ErrorKind::infeasible: return "infeasible";
  }
  return "unknown";
}

}  // namespace sigtest
