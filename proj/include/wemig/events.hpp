#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "wemig/geometry.hpp"
#include "wemig/rays.hpp"

namespace wemig {

struct EventRow {
    double x, z;    // scatterer
    double s, r;    // surface positions
    double t_total; // two-way time, s
    double sigma;   // horizontal wavenumber at s, per unit tau (s/m)
    double rho;     // horizontal wavenumber at r, per unit tau (s/m)
};

using EventTable = std::vector<EventRow>;

struct EventOptions {
    std::size_t n_angles = 181;  // fan size used to bracket each surface position
    double max_angle = 85.0 * M_PI / 180.0;
    double dz = 2.0;             // depth-tracer step, m
    double tolerance = 1e-7;     // landing tolerance on the surface, m
};

/// One-way leg from the scatterer to a surface position.
struct SurfaceLeg {
    double x_surface;
    double t;
    double xi;  // per unit tau
};

namespace detail {

inline std::optional<SurfaceLeg> shoot_leg(const VelocityModel& m, double x, double z, double sin_angle,
                                           double dz) {
    const double c = m(x, z);
    const double xi = sin_angle / c;  // tau = 1
    try {
        const RayPath p = trace_ray_depth(m, x, z, xi, 1.0, dz, 0.0);
        const RayState& e = p.back();
        if (std::abs(e.z) > 1e-9) return std::nullopt;  // left laterally
        return SurfaceLeg{e.x, e.t, e.xi};
    } catch (const TurningPointError&) {
        return std::nullopt;
    } catch (const EmptyPathError&) {
        return std::nullopt;
    }
}

}  // namespace detail

/// Legs from (x, z) landing on each surface position of `targets`; missing
/// entries did not reach the surface.
inline std::vector<std::optional<SurfaceLeg>> surface_legs(const VelocityModel& m, double x, double z,
                                                           const Axis& targets, const EventOptions& opt = {}) {
    if (!(z > 0.0)) throw ContractError("scatterer must lie strictly below the surface");
    std::vector<double> sn(opt.n_angles);
    std::vector<std::optional<SurfaceLeg>> fan(opt.n_angles);
    const double smax = std::sin(opt.max_angle);
    for (std::size_t i = 0; i < opt.n_angles; ++i) {
        sn[i] = -smax + 2.0 * smax * static_cast<double>(i) / static_cast<double>(opt.n_angles - 1);
        fan[i] = detail::shoot_leg(m, x, z, sn[i], opt.dz);
    }
    std::vector<std::optional<SurfaceLeg>> out(targets.n);
    for (std::size_t k = 0; k < targets.n; ++k) {
        const double xt = targets.coord(k);
        for (std::size_t i = 0; i + 1 < opt.n_angles; ++i) {
            if (!fan[i] || !fan[i + 1]) continue;
            const double f0 = fan[i]->x_surface - xt, f1 = fan[i + 1]->x_surface - xt;
            if (f0 * f1 > 0.0) continue;
            double a = sn[i], b = sn[i + 1], fa = f0;
            std::optional<SurfaceLeg> best = std::abs(f0) < std::abs(f1) ? fan[i] : fan[i + 1];
            for (int it = 0; it < 100 && std::abs(best->x_surface - xt) > opt.tolerance; ++it) {
                const double mid = 0.5 * (a + b);
                auto leg = detail::shoot_leg(m, x, z, mid, opt.dz);
                if (!leg) break;
                const double fm = leg->x_surface - xt;
                best = leg;
                if (fm * fa <= 0.0) {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            if (std::abs(best->x_surface - xt) <= std::max(opt.tolerance, 0.25 * targets.delta)) out[k] = best;
            break;
        }
    }
    return out;
}

/// Samples of the canonical relation for a point scatterer: every (s, r) of
/// the geometry reached by both legs, ordered by (s, r) index.
inline EventTable predict_events(const VelocityModel& m, double x, double z, const AcquisitionGeometry& g,
                                 const EventOptions& opt = {}) {
    const auto src = surface_legs(m, x, z, g.s, opt);
    const auto rec = same_sampling(g.s, g.r) ? src : surface_legs(m, x, z, g.r, opt);
    const double t_max = g.t.last();
    EventTable table;
    for (std::size_t i = 0; i < g.s.n; ++i) {
        if (!src[i]) continue;
        for (std::size_t j = 0; j < g.r.n; ++j) {
            if (!rec[j]) continue;
            const double t = src[i]->t + rec[j]->t;
            if (!(t > 0.0) || t > t_max) continue;
            table.push_back({x, z, g.s.coord(i), g.r.coord(j), t, src[i]->xi, rec[j]->xi});
        }
    }
    return table;
}

}  // namespace wemig
