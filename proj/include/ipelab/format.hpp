#pragma once

#include <cstdio>
#include <optional>
#include <string>

namespace ipelab {

/// Shortest-safe round-trip text for a double ("%.17g"), used by every CSV
/// writer so outputs are byte-stable.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Empty field for a missing value.
inline std::string format_optional(const std::optional<double>& x) {
    return x ? format_double(*x) : std::string();
}

} // namespace ipelab
