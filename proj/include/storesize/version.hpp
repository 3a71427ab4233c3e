#pragma once

namespace storesize {

inline constexpr const char* kToolName = "storesize";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace storesize
