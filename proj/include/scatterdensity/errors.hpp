#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scatterdensity {

/// Failure categories raised by the library. Every thrown exception is an
/// Error carrying one of these, so callers (the CLI in particular) can map
/// them onto exit codes without string matching.
enum class ErrorKind {
  invalid_argument,
  numerical_failure,
  unbounded_norm,
  zero_vector,
  anti_diagonal,
  resolution_too_small,
  not_radial,
  interval_contains_zero,
  moment_may_diverge,
  eig_failure,
  exponent_too_small,
  match_radius_too_small,
  integrator_failure,
  channel_truncation,
  config_error,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace scatterdensity
