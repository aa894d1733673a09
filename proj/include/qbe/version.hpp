#pragma once

namespace qbe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qbe
