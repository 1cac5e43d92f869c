#pragma once

namespace decon {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace decon
