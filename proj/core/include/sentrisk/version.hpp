#pragma once

namespace sentrisk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sentrisk
