#pragma once

namespace semval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace semval
