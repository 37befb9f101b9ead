#pragma once

namespace snipcorr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace snipcorr
