#pragma once

namespace ollga {

inline constexpr const char* version = "0.1.0";

}  // namespace ollga
