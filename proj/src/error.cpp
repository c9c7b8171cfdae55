#include "blendforge/error.hpp"

namespace blendforge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::InvalidRegion: return "invalid-region";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::UndefinedMetric: return "undefined-metric";
    case ErrorCode::ManifestIntegrity: return "manifest-integrity";
    case ErrorCode::Join: return "join";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace blendforge
