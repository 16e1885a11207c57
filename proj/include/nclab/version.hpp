#pragma once

namespace nclab {

inline constexpr const char* artifact_name = "nclab";
inline constexpr const char* artifact_version = "0.1.0";

}  // namespace nclab
