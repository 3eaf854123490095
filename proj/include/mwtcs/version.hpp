#pragma once

namespace mwtcs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mwtcs
