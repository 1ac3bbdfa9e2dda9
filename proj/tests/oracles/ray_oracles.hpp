#pragma once

// Traveltime references computed without the library's ray tracers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Straight-ray two-way time in a constant medium.
inline double constant_two_way(double c, double x, double z, double s, double r) {
    return (std::hypot(s - x, z) + std::hypot(r - x, z)) / c;
}

/// One-way time between two points in c(z) = a + b z (circular rays).
inline double gradient_time(double a, double b, double x0, double z0, double x1, double z1) {
    const double c0 = a + b * z0, c1 = a + b * z1;
    const double d2 = (x1 - x0) * (x1 - x0) + (z1 - z0) * (z1 - z0);
    if (b == 0.0) return std::sqrt(d2) / a;
    return std::acosh(1.0 + b * b * d2 / (2.0 * c0 * c1)) / std::abs(b);
}

/// Fermat two-point solver: the path is x(z) on n equal depth intervals with
/// fixed ends; Newton iterations on the interior nodes with a tridiagonal
/// finite-difference Hessian. Slowness is integrated with Simpson's rule on
/// each segment.
class RayBender {
public:
    using Velocity = std::function<double(double x, double z)>;

    explicit RayBender(Velocity c, std::size_t segments = 400) : c_(std::move(c)), n_(segments) {}

    double segment_time(double xa, double za, double xb, double zb) const {
        const int k = 8;
        const double len = std::hypot(xb - xa, zb - za);
        double s = 0.0;
        for (int i = 0; i <= k; ++i) {
            const double u = static_cast<double>(i) / k;
            const double w = (i == 0 || i == k) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w / c_(xa + u * (xb - xa), za + u * (zb - za));
        }
        return len * s / (3.0 * k);
    }

    double path_time(const std::vector<double>& x, const std::vector<double>& z) const {
        double t = 0.0;
        for (std::size_t i = 0; i + 1 < x.size(); ++i) t += segment_time(x[i], z[i], x[i + 1], z[i + 1]);
        return t;
    }

    /// Minimum time from (x0, z0) to (x1, z1), z0 != z1, starting from the
    /// straight line.
    double solve(double x0, double z0, double x1, double z1) const {
        std::vector<double> x(n_ + 1), z(n_ + 1);
        for (std::size_t i = 0; i <= n_; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(n_);
            x[i] = x0 + u * (x1 - x0);
            z[i] = z0 + u * (z1 - z0);
        }
        const double h = 1e-3;
        const std::size_t m = n_ - 1;
        std::vector<double> g(m), d(m), e(m, 0.0);
        for (int it = 0; it < 50; ++it) {
            auto seg = [&](std::size_t i, double xa, double xb) { return segment_time(xa, z[i], xb, z[i + 1]); };
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t i = k + 1;
                auto local = [&](double xi) { return seg(i - 1, x[i - 1], xi) + seg(i, xi, x[i + 1]); };
                const double fp = local(x[i] + h), f0 = local(x[i]), fm = local(x[i] - h);
                g[k] = (fp - fm) / (2 * h);
                d[k] = (fp - 2 * f0 + fm) / (h * h);
                if (k + 1 < m)
                    e[k] = (seg(i, x[i] + h, x[i + 1] + h) - seg(i, x[i] + h, x[i + 1] - h) -
                            seg(i, x[i] - h, x[i + 1] + h) + seg(i, x[i] - h, x[i + 1] - h)) /
                           (4 * h * h);
            }
            // Thomas algorithm for H dx = -g
            std::vector<double> cp(m), dp(m);
            cp[0] = e[0] / d[0];
            dp[0] = -g[0] / d[0];
            for (std::size_t k = 1; k < m; ++k) {
                const double den = d[k] - e[k - 1] * cp[k - 1];
                cp[k] = e[k] / den;
                dp[k] = (-g[k] - e[k - 1] * dp[k - 1]) / den;
            }
            double step = 0.0;
            for (std::size_t k = m; k-- > 0;) {
                if (k + 1 < m) dp[k] -= cp[k] * dp[k + 1];
                x[k + 1] += dp[k];
                step = std::max(step, std::abs(dp[k]));
            }
            if (step < 1e-9) break;
        }
        return path_time(x, z);
    }

private:
    Velocity c_;
    std::size_t n_;
};

}  // namespace oracle
