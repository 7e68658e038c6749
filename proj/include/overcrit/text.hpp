#pragma once

#include <string>

namespace overcrit {

// printf-style formatting into a std::string.
[[gnu::format(printf, 1, 2)]] std::string strfmt(const char* fmt, ...);

} // namespace overcrit
