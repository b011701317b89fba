#pragma once

namespace vstates {
inline constexpr const char* version = "0.1.0";
}
