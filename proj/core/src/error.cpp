#include "cutler/error.hpp"

namespace cutler {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::io_failure: return "i/o failure";
    case Errc::bad_magic: return "bad magic";
    case Errc::truncated: return "truncated data";
    case Errc::unknown_dtype: return "unknown dtype";
    case Errc::malformed_header: return "malformed header";
    case Errc::count_mismatch: return "run-length count mismatch";
    case Errc::degenerate_feature: return "degenerate feature";
    case Errc::solver_failure: return "solver failure";
    case Errc::exhausted: return "all patches masked";
    case Errc::empty_mask: return "empty mask";
    case Errc::image_mismatch: return "image mismatch";
    case Errc::duplicate_image: return "duplicate image id";
    case Errc::placement_failed: return "placement failed";
    case Errc::parse_error: return "parse error";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

SolverError::SolverError(const std::string& message, double residual)
    : Error(Errc::solver_failure, message + " (residual " + std::to_string(residual) + ")"),
      residual_(residual) {}

}  // namespace cutler
