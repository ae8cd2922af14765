#pragma once

namespace chaoscomm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace chaoscomm
