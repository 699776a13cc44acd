#pragma once

namespace wasserstat {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wasserstat
