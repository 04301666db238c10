#pragma once

namespace apsk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace apsk
