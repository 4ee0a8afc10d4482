#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace tauber {

/// Default density of log-spaced scan grids.
inline constexpr int kPointsPerDecade = 64;

/// n points from lo to hi inclusive, equally spaced.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

/// n points from lo to hi inclusive, geometrically spaced. Requires 0 < lo <= hi.
inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

/// Number of points needed to cover [lo, hi] at `per_decade` points per decade (at least 2).
inline std::size_t decade_count(double lo, double hi, int per_decade = kPointsPerDecade) {
    const double decades = std::log10(hi / lo);
    const auto n = static_cast<std::size_t>(std::ceil(decades * per_decade)) + 1;
    return n < 2 ? 2 : n;
}

}  // namespace tauber
