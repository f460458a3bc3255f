#pragma once

namespace fhinf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fhinf
