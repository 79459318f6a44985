#pragma once

namespace ssvm {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "ssvm";

}  // namespace ssvm
