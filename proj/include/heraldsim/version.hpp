#pragma once

namespace heraldsim {

inline constexpr const char* kVersion = "0.1.0";

} // namespace heraldsim
