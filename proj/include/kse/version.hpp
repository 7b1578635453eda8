#pragma once

namespace kse {

inline constexpr const char* kVersionString = "1.0.0";

}  // namespace kse
