#include "unifluct/error.hpp"

namespace unifluct {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidParameter:
      return "invalid-parameter";
    case ErrorKind::kInsufficientData:
      return "insufficient-data";
    case ErrorKind::kDegenerateData:
      return "degenerate-data";
    case ErrorKind::kNumericalConvergence:
      return "numerical-convergence";
    case ErrorKind::kScanFailed:
      return "scan-failed";
    case ErrorKind::kParse:
      return "parse-error";
    case ErrorKind::kIo:
      return "io-error";
  }
  return "unknown";
}

}  // namespace unifluct
