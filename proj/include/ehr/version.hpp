#pragma once

namespace ehr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ehr
