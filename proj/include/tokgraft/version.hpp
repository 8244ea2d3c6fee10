#pragma once

namespace tokgraft {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tokgraft
