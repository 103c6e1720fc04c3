#pragma once

namespace salient {

inline constexpr const char* kToolName = "salient-align";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace salient
