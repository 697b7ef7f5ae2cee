#pragma once

namespace pvtnet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pvtnet
