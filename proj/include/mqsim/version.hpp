#pragma once

namespace mqsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mqsim
