#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cutler {

/// Failure categories surfaced by the library. Each I/O or contract failure
/// maps to exactly one code so callers can branch without parsing messages.
enum class Errc {
  invalid_argument,
  io_failure,
  bad_magic,
  truncated,
  unknown_dtype,
  malformed_header,
  count_mismatch,
  degenerate_feature,
  solver_failure,
  exhausted,
  empty_mask,
  image_mismatch,
  duplicate_image,
  placement_failed,
  parse_error,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised when the eigensolver cannot certify its result.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, double residual);

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace cutler
