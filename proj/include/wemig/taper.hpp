#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wemig/error.hpp"

namespace wemig {

/// Symmetric weights in [0, 1]: one on the central flat_fraction * n samples,
/// sin^2 ramps to zero outside. With flat_fraction = 0 the window is
/// w[i] = sin^2(pi (i + 1/2) / n).
inline std::vector<double> build_taper(std::size_t n, double flat_fraction) {
    if (!(flat_fraction >= 0.0 && flat_fraction <= 1.0))
        throw RangeError("taper flat fraction must lie in [0, 1]");
    std::vector<double> w(n, 1.0);
    if (n == 0) return w;
    const auto n_flat = static_cast<std::size_t>(std::lround(flat_fraction * static_cast<double>(n)));
    const double ramp = 0.5 * static_cast<double>(n - std::min(n_flat, n));
    if (ramp <= 0.0) return w;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(std::min(i, n - 1 - i)) + 0.5;
        if (d < ramp) {
            const double s = std::sin(0.5 * M_PI * d / ramp);
            w[i] = s * s;
        }
    }
    return w;
}

/// Smooth step: 0 for u <= 0, 1 for u >= 1, sin^2 ramp in between.
inline double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double s = std::sin(0.5 * M_PI * u);
    return s * s;
}

}  // namespace wemig
