#pragma once

namespace latvib {
inline constexpr const char* kVersion = "0.1.0";
}
