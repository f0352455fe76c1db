#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace qoc {

/// Trapezoidal quadrature of nodal samples on a uniform grid with spacing dt.
inline double trapezoid(std::span<const double> f, double dt) {
    if (f.size() < 2) return 0.0;
    double sum = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < f.size(); ++k) sum += f[k];
    return sum * dt;
}

/// Running trapezoidal integral; result[0] = 0, result[k] = integral up to node k.
inline std::vector<double> cumulative_trapezoid(std::span<const double> f, double dt) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k)
        out[k] = out[k - 1] + 0.5 * dt * (f[k - 1] + f[k]);
    return out;
}

/// Tail integral from node k to the last node; result.back() = 0.
inline std::vector<double> reverse_cumulative_trapezoid(std::span<const double> f, double dt) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = f.size(); k-- > 1;)
        out[k - 1] = out[k] + 0.5 * dt * (f[k - 1] + f[k]);
    return out;
}

inline bool all_finite(std::span<const double> f) {
    for (double v : f)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace qoc
