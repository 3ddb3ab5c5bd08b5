#pragma once

namespace morphtag {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "morphtag";

}  // namespace morphtag
