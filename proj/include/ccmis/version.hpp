#pragma once

namespace ccmis {

inline constexpr const char* version = "0.1.0";

}  // namespace ccmis
