#pragma once

namespace laserclock {

inline constexpr const char* tool_name = "laserclock";
inline constexpr const char* tool_version = "0.1.0";

}  // namespace laserclock
