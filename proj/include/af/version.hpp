#pragma once

namespace af {

inline constexpr const char* kToolkitVersion = "0.1.0";

} // namespace af
