#pragma once

namespace entrocone {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace entrocone
