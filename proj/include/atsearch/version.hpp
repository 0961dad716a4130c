#pragma once

namespace atsearch {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace atsearch
