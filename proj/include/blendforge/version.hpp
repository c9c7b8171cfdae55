#pragma once

namespace blendforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace blendforge
