#pragma once

namespace somno {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace somno
