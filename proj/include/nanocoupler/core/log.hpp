#pragma once

#include <atomic>
#include <iostream>
#include <string_view>

namespace nc::log {

inline std::atomic<bool>& quiet_flag()
{
    static std::atomic<bool> q{false};
    return q;
}

inline void set_quiet(bool q) { quiet_flag() = q; }

inline void info(std::string_view msg)
{
    if (!quiet_flag()) std::cerr << "[info] " << msg << '\n';
}

inline void warn(std::string_view msg)
{
    if (!quiet_flag()) std::cerr << "[warn] " << msg << '\n';
}

}  // namespace nc::log
