#pragma once

namespace symtest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace symtest
