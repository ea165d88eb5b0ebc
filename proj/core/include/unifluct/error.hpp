#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace unifluct {

enum class ErrorKind {
  kInvalidParameter,
  kInsufficientData,
  kDegenerateData,
  kNumericalConvergence,
  kScanFailed,
  kParse,
  kIo,
};

/// Stable machine-readable name, e.g. "invalid-parameter".
std::string_view to_string(ErrorKind kind);

/// Single exception type for the library. The kind is what callers branch on;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<double> error_estimate = std::nullopt)
      : std::runtime_error(message),
        kind_(kind),
        error_estimate_(error_estimate) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Achieved error estimate, set for kNumericalConvergence only.
  std::optional<double> error_estimate() const noexcept {
    return error_estimate_;
  }

 private:
  ErrorKind kind_;
  std::optional<double> error_estimate_;
};

}  // namespace unifluct
