#pragma once

namespace dcov {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dcov
