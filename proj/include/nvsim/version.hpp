#pragma once

namespace nvsim {

inline constexpr const char* kVersion = "1.0.0";

} // namespace nvsim
