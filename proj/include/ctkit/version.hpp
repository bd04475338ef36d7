#pragma once

namespace ctkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ctkit
