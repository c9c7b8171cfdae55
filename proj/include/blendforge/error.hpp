#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blendforge {

enum class ErrorCode {
  InvalidParameter,
  Shape,
  DegenerateGeometry,
  InvalidRegion,
  Convergence,
  UndefinedMetric,
  ManifestIntegrity,
  Join,
  InvalidInput,
  Schema,
  Io,
};

std::string_view error_code_name(ErrorCode code);

/// Base of every error the toolkit raises. The code is stable and is what the
/// CLI prints in its JSON diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when conjugate gradient stops at max_iters above tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double residual, int iterations)
      : Error(ErrorCode::Convergence, message),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// File or schema problems that can be pinned to a location in an input.
class LocatedError : public Error {
 public:
  LocatedError(ErrorCode code, const std::string& message, std::string path,
               int line = 0)
      : Error(code, message), path_(std::move(path)), line_(line) {}

  const std::string& path() const noexcept { return path_; }
  /// 1-based line number, 0 when unknown.
  int line() const noexcept { return line_; }

 private:
  std::string path_;
  int line_;
};

}  // namespace blendforge
