#pragma once

#include "causalift/error.hpp"

#include <charconv>
#include <string>

namespace causalift::detail {

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw DataError("cannot format value");
    }
    return std::string(buf, ptr);
}

}  // namespace causalift::detail
