#pragma once

namespace cfdr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cfdr
