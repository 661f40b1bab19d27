#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace nc::experiments {

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Shortest round-trip text for a double, used in digests and CSVs.
inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    // Prefer the short form when it round-trips.
    for (int p = 6; p < 17; ++p) {
        std::snprintf(buf, sizeof buf, "%.*g", p, v);
        if (std::stod(buf) == v) return buf;
    }
    return s;
}

}  // namespace nc::experiments
