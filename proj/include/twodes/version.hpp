// version.hpp - library version string recorded in run manifests
#pragma once

namespace twodes {

inline constexpr const char* code_version = "0.1.0";

}  // namespace twodes
