#pragma once

#include <string_view>

namespace chipfire {

inline constexpr std::string_view kVersion = "0.1.0";

// Pseudo-random source used by random strategies and the fuzzer.
// Pinned so that seeds reproduce bit-identical runs across builds.
inline constexpr std::string_view kRngName = "mt19937_64/v1";

}  // namespace chipfire
