#pragma once

#include <string>
#include <string_view>

namespace dd2 {

// 64-bit FNV-1a, lower-case hex. Used for content and state checksums.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace dd2
