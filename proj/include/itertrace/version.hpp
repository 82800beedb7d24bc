#pragma once

namespace itertrace {

inline constexpr const char* kToolName = "itertrace";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace itertrace
