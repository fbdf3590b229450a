#pragma once

namespace tailgrid {
inline constexpr const char* kVersion = "0.1.0";
}
