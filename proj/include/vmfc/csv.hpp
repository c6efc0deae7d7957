#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace vmfc {

// Shortest-faithful decimal with 17 significant digits; all CSV output goes
// through this so reruns are byte-identical.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string fmt17(int x) { return std::to_string(x); }
inline std::string fmt17(long x) { return std::to_string(x); }

namespace detail {
inline void csv_row_impl(std::ostream& os, bool) { os << '\n'; }
template <typename T, typename... Rest>
void csv_row_impl(std::ostream& os, bool first, const T& v, const Rest&... rest) {
    if (!first) os << ',';
    if constexpr (std::is_floating_point_v<T>)
        os << fmt17(v);
    else
        os << v;
    csv_row_impl(os, false, rest...);
}
}  // namespace detail

// Writes one CSV row, LF-terminated, floats at 17 significant digits.
template <typename... Ts>
void csv_row(std::ostream& os, const Ts&... vs) {
    detail::csv_row_impl(os, true, vs...);
}

}  // namespace vmfc
