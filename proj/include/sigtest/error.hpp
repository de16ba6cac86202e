#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sigtest {

enum class ErrorKind {
  invalid_input,
  degenerate_column,
  singular_design,
  duplicate_column,
  missing_variance,
  not_estimable,
  degenerate_variance,
  stale_path,
  path_too_short,
  unsupported_step,
  too_few_remaining,
  domain,
  separation,
  convergence,
  no_events,
  unreliable_max,
  infeasible,
};

/// Short snake_case name of an error kind, used in failure tallies and CLI messages.
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sigtest
