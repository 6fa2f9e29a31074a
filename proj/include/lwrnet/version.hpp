#pragma once

namespace lwrnet {

inline constexpr const char* kToolName = "lwrnet";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace lwrnet
