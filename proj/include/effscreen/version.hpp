#pragma once

namespace effscreen {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace effscreen
