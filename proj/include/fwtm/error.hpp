#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fwtm {

enum class ErrorKind {
  InvalidArgument,
  InvalidConfig,
  DomainViolation,
  NonconcavePrior,
  NumericFailure,
  InfeasibleRegion,
  ParseError,
  FormatError,
  BoundsError,
  UnsupportedVersion,
  ValidationError,
};

std::string_view to_string(ErrorKind kind);

/// All library failures are reported through this exception; `kind()` lets
/// callers (and tests) dispatch without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fwtm
