#pragma once

// Bicharacteristics of P = (c0^-2 tau^2 - xi^2 - zeta^2) / 2 in time and in
// depth, plus the double-square-root symbol Gamma and its inverse in tau.
//
// Directions follow (xi, zeta) = -tau c0^-1 alpha: a ray with zeta > 0 and
// tau > 0 moves upward.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "wemig/error.hpp"
#include "wemig/velocity.hpp"

namespace wemig {

struct RayState {
    double x = 0.0;
    double z = 0.0;
    double t = 0.0;
    double xi = 0.0;
    double zeta = 0.0;
    double tau = 1.0;
};

using RayPath = std::vector<RayState>;

struct DsrRayState {
    RayState source_leg;
    RayState receiver_leg;
};

struct DsrPoint {
    RayState source;
    RayState receiver;
    double t_total = 0.0;
    double gamma = 0.0;
};

using DsrPath = std::vector<DsrPoint>;

/// |P| normalized by (tau / c0)^2.
inline double hamiltonian_drift(const VelocityModel& m, const RayState& s) {
    const double c = m(s.x, s.z);
    const double w = s.tau * s.tau / (c * c);
    return std::abs(w - s.xi * s.xi - s.zeta * s.zeta) / w;
}

inline RayState on_shell_state(const VelocityModel& m, double x, double z, double alpha_x, double alpha_z,
                               double tau) {
    const double nrm = std::hypot(alpha_x, alpha_z);
    if (!(nrm > 0.0)) throw ContractError("direction must be nonzero");
    const double c = m(x, z);
    return {x, z, 0.0, -tau * alpha_x / (nrm * c), -tau * alpha_z / (nrm * c), tau};
}

namespace detail {

using Vec5 = std::array<double, 5>;  // x, z, t, xi, zeta

inline Vec5 axpy(const Vec5& y, double a, const Vec5& k) {
    Vec5 o;
    for (int i = 0; i < 5; ++i) o[i] = y[i] + a * k[i];
    return o;
}

inline Vec5 rk4(const Vec5& y, double h, auto&& f) {
    const Vec5 k1 = f(y);
    const Vec5 k2 = f(axpy(y, 0.5 * h, k1));
    const Vec5 k3 = f(axpy(y, 0.5 * h, k2));
    const Vec5 k4 = f(axpy(y, h, k3));
    Vec5 o;
    for (int i = 0; i < 5; ++i) o[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return o;
}

/// Signed distances (in cells) of (x, z) beyond the four sides of patch p,
/// ordered left, right, top, bottom. Sides on the grid border are open
/// (-inf), matching the clamped lookup.
inline std::array<double, 4> patch_offsets(const VelocityModel& m, const VelocityModel::Patch& p, double x,
                                           double z) {
    const double u = m.x_axis().index_of(x) - static_cast<double>(p.ix);
    const double w = m.z_axis().index_of(z) - static_cast<double>(p.iz);
    const double open = -std::numeric_limits<double>::infinity();
    return {p.ix > 0 ? -u : open, p.ix + 2 < m.x_axis().n ? u - 1.0 : open, p.iz > 0 ? -w : open,
            p.iz + 2 < m.z_axis().n ? w - 1.0 : open};
}

/// One RK4 step of size h in which every stage sees a single bilinear
/// patch: the step is cut where the path leaves a cell, so the kinks of the
/// bilinear field do not degrade the order. f(y, patch) is the flow.
inline Vec5 patch_rk4(const VelocityModel& m, const Vec5& y0, double h, auto&& f) {
    Vec5 y = y0;
    auto p = m.patch_at(y[0], y[1]);
    double done = 0.0;
    for (int sub = 0; sub < 64; ++sub) {
        const double rem = h - done;
        auto flow = [&](const Vec5& v) { return f(v, p); };
        const Vec5 yn = rk4(y, rem, flow);
        const auto off = patch_offsets(m, p, yn[0], yn[1]);
        std::array<bool, 4> crossed{};
        bool any = false;
        for (int k = 0; k < 4; ++k) any |= crossed[k] = off[k] > 1e-12;
        if (!any) return yn;
        // the path left through the crossed sides only; find the first exit
        auto excess = [&](const Vec5& v) {
            const auto o = patch_offsets(m, p, v[0], v[1]);
            double e = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < 4; ++k)
                if (crossed[k]) e = std::max(e, o[k]);
            return e;
        };
        double a = 0.0, b = rem, ea = excess(y), eb = excess(yn), sx = b;
        if (ea >= 0.0) {
            sx = 0.0;  // already on the side: switch cells without moving
        } else {
            int side = 0;
            for (int it = 0; it < 100; ++it) {
                sx = b - eb * (b - a) / (eb - ea);
                if (!(sx > std::min(a, b) && sx < std::max(a, b))) sx = 0.5 * (a + b);
                const double es = excess(rk4(y, sx, flow));
                if (std::abs(es) < 1e-13 || std::abs(b - a) < 1e-15 * std::abs(h)) break;
                if (es > 0.0) {
                    b = sx;
                    eb = es;
                    if (side == 1) ea *= 0.5;
                    side = 1;
                } else {
                    a = sx;
                    ea = es;
                    if (side == -1) eb *= 0.5;
                    side = -1;
                }
            }
            y = rk4(y, sx, flow);
            done += sx;
        }
        const auto at = patch_offsets(m, p, y[0], y[1]);
        if (crossed[0] && at[0] >= -1e-9) --p.ix;
        if (crossed[1] && at[1] >= -1e-9) ++p.ix;
        if (crossed[2] && at[2] >= -1e-9) --p.iz;
        if (crossed[3] && at[3] >= -1e-9) ++p.iz;
    }
    auto flow = [&](const Vec5& v) { return f(v, p); };
    return rk4(y, h - done, flow);
}

/// x-slope for the flow. A ray with xi == 0 lying on an interior vertical
/// grid line rides a kink of the bilinear field; the mean of the two
/// one-sided slopes keeps it on the line when the kink is symmetric, where
/// the one-sided choice would make it chatter between the cells.
inline double flow_cx(const VelocityModel& m, const VelocityModel::Patch& p, double x, double z, double xi,
                      double cx) {
    if (xi != 0.0) return cx;
    const double u = m.x_axis().index_of(x) - static_cast<double>(p.ix);
    VelocityModel::Patch q = p;
    if (std::abs(u) < 1e-12 && p.ix > 0) --q.ix;
    else if (std::abs(u - 1.0) < 1e-12 && p.ix + 2 < m.x_axis().n) ++q.ix;
    else return cx;
    return 0.5 * (cx + m.sample(q, x, z).cx);
}

/// Vertical wavenumber of an upgoing leg; negative A means the leg turned.
inline double vertical_wavenumber(double c, double xi, double tau, bool& ok) {
    const double a = tau * tau / (c * c) - xi * xi;
    ok = a > 0.0;
    return ok ? std::copysign(std::sqrt(a), tau) : 0.0;
}

}  // namespace detail

/// RK4 in t (steps cut at cell edges, see patch_rk4). Stops at t_max (last step shortened to land on it) or before the
/// first step that would leave the model.
inline RayPath trace_ray_time(const VelocityModel& m, const RayState& start, double dt, double t_max) {
    if (!(dt > 0.0)) throw RangeError("time step must be positive");
    if (start.tau == 0.0) throw ContractError("tau must be nonzero");
    if (!m.inside(start.x, start.z)) throw ContractError("ray start lies outside the model");
    if (hamiltonian_drift(m, start) > 1e-6) throw ContractError("ray start is off-shell");

    const double tau = start.tau;
    auto f = [&](const detail::Vec5& y, const VelocityModel::Patch& p) {
        const auto s = m.sample(p, y[0], y[1]);
        const double c2 = s.c * s.c;
        const double cx = detail::flow_cx(m, p, y[0], y[1], y[3], s.cx);
        return detail::Vec5{-c2 * y[3] / tau, -c2 * y[4] / tau, 1.0, tau * cx / s.c, tau * s.cz / s.c};
    };
    RayPath path{start};
    detail::Vec5 y{start.x, start.z, start.t, start.xi, start.zeta};
    const double t_end = start.t + t_max;
    while (y[2] < t_end - 1e-12 * dt) {
        const double h = std::min(dt, t_end - y[2]);
        const detail::Vec5 next = detail::patch_rk4(m, y, h, f);
        if (!m.inside(next[0], next[1])) break;
        y = next;
        path.push_back({y[0], y[1], y[2], y[3], y[4], tau});
    }
    if (path.size() < 2 && t_max > 0.0) throw EmptyPathError("ray left the model before completing a single step");
    return path;
}

/// Upward integration in z of the depth Hamiltonian zeta = b(x, z, xi, tau).
/// The last step is shortened to land on z_end.
inline RayPath trace_ray_depth(const VelocityModel& m, double x0, double z0, double xi0, double tau, double dz,
                               double z_end, double t0 = 0.0) {
    if (!(dz > 0.0)) throw RangeError("depth step must be positive");
    if (!(z_end < z0)) throw ContractError("depth tracing runs upward: z_end must lie above z0");
    if (tau == 0.0) throw ContractError("tau must be nonzero");
    if (!m.inside(x0, z0)) throw ContractError("ray start lies outside the model");
    bool ok = false;
    const double zeta0 = detail::vertical_wavenumber(m(x0, z0), xi0, tau, ok);
    if (!ok) throw DomainError("start wavenumber is not propagating");

    // State vector reuses slot 1 for z (the parameter) to share the RK4 kernel.
    double z_fail = z0;
    bool turned = false;
    auto f = [&](const detail::Vec5& y, const VelocityModel::Patch& p) {
        const auto s = m.sample(p, y[0], y[1]);
        bool good = false;
        const double b = detail::vertical_wavenumber(s.c, y[3], tau, good);
        if (!good) {
            if (!turned) z_fail = y[1];
            turned = true;
            return detail::Vec5{0, 0, 0, 0, 0};
        }
        const double cx = detail::flow_cx(m, p, y[0], y[1], y[3], s.cx);
        return detail::Vec5{y[3] / b, 1.0, -tau / (s.c * s.c * b), -tau * tau * cx / (s.c * s.c * s.c * b), 0.0};
    };

    RayPath path{{x0, z0, t0, xi0, zeta0, tau}};
    detail::Vec5 y{x0, z0, t0, xi0, 0.0};
    while (y[1] > z_end + 1e-12 * dz) {
        const double h = -std::min(dz, y[1] - z_end);
        const detail::Vec5 next = detail::patch_rk4(m, y, h, f);
        if (turned) throw TurningPointError("ray turned horizontal", z_fail);
        if (!m.inside(next[0], next[1])) break;
        const double zeta = detail::vertical_wavenumber(m(next[0], next[1]), next[3], tau, ok);
        if (!ok) throw TurningPointError("ray turned horizontal", next[1]);
        y = next;
        path.push_back({y[0], y[1], y[2], y[3], zeta, tau});
    }
    if (path.size() < 2) throw EmptyPathError("ray left the model before completing a single step");
    return path;
}

/// sgn(tau) [sqrt(tau^2/c(s)^2 - sigma^2) + sqrt(tau^2/c(r)^2 - rho^2)].
inline double gamma_symbol(double s, double r, double sigma, double rho, double tau, double z,
                           const VelocityModel& m) {
    const double cs = m(s, z), cr = m(r, z);
    const double as = tau * tau / (cs * cs) - sigma * sigma;
    const double ar = tau * tau / (cr * cr) - rho * rho;
    if (!(as > 0.0) || !(ar > 0.0)) throw DomainError("gamma evaluated outside the propagating regime");
    return std::copysign(std::sqrt(as) + std::sqrt(ar), tau);
}

/// |dGamma/dtau| = c_s^-2 (c_s^-2 - sigma^2/tau^2)^-1/2 + (same for r).
inline double gamma_tau_derivative(double cs, double cr, double sigma, double rho, double tau) {
    const double ps = sigma / tau, pr = rho / tau;
    return 1.0 / (cs * cs * std::sqrt(1.0 / (cs * cs) - ps * ps)) +
           1.0 / (cr * cr * std::sqrt(1.0 / (cr * cr) - pr * pr));
}

/// tau with gamma_symbol(tau) = zeta on the monotone branch |tau| > tau_min.
inline double invert_gamma(double s, double r, double sigma, double rho, double zeta, double z,
                           const VelocityModel& m) {
    if (zeta == 0.0 || !std::isfinite(zeta)) throw InversionError("zeta must be nonzero and finite");
    const double cs = m(s, z), cr = m(r, z);
    const double target = std::abs(zeta);
    auto g = [&](double tau) {
        const double as = std::max(0.0, tau * tau / (cs * cs) - sigma * sigma);
        const double ar = std::max(0.0, tau * tau / (cr * cr) - rho * rho);
        return std::sqrt(as) + std::sqrt(ar);
    };
    const double tau_min = std::max(std::abs(sigma) * cs, std::abs(rho) * cr);
    if (target <= g(tau_min) * (1.0 + 1e-14)) throw InversionError("zeta below the branch minimum");

    double lo = tau_min;
    double hi = std::max(tau_min * 2.0, target / (1.0 / cs + 1.0 / cr));
    for (int it = 0; g(hi) < target; ++it) {
        if (it > 200) throw InversionError("could not bracket the root");
        lo = hi;
        hi *= 2.0;
    }
    double tau = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double res = g(tau) - target;
        if (res > 0.0) hi = tau; else lo = tau;
        const double deriv = tau > tau_min ? gamma_tau_derivative(cs, cr, sigma, rho, tau) : 0.0;
        double next = (deriv > 0.0 && std::isfinite(deriv)) ? tau - res / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - tau) <= 1e-15 * tau || hi - lo <= 1e-15 * hi) {
            tau = next;
            break;
        }
        tau = next;
    }
    if (std::abs(g(tau) - target) > 1e-10 * target) throw InversionError("gamma inversion did not converge");
    return std::copysign(tau, zeta);
}

/// Both legs traced upward with a shared depth step. The path ends where the
/// shorter leg ends.
inline DsrPath trace_dsr_ray(const VelocityModel& m, const DsrRayState& st, double dz, double z_end) {
    const RayState& a = st.source_leg;
    const RayState& b = st.receiver_leg;
    if (a.z != b.z || a.tau != b.tau) throw ContractError("DSR legs must share depth and tau");
    const RayPath ps = trace_ray_depth(m, a.x, a.z, a.xi, a.tau, dz, z_end, a.t);
    const RayPath pr = trace_ray_depth(m, b.x, b.z, b.xi, b.tau, dz, z_end, b.t);
    const std::size_t n = std::min(ps.size(), pr.size());
    DsrPath out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        DsrPoint p{ps[i], pr[i], ps[i].t + pr[i].t, ps[i].zeta + pr[i].zeta};
        const double ref = gamma_symbol(p.source.x, p.receiver.x, p.source.xi, p.receiver.xi, a.tau, ps[i].z, m);
        if (std::abs(ref - p.gamma) > 1e-10 * std::abs(ref))
            throw NumericalContractError("DSR vertical wavenumber departs from gamma");
        out.push_back(p);
    }
    return out;
}

struct SlopeCheck {
    bool pass = false;
    double worst_slope = 0.0;  // min over steps of -dz/dt, m/s
};

inline SlopeCheck check_dsr_assumption(const RayPath& path, double epsilon) {
    if (path.size() < 2) throw ContractError("path must hold at least two states");
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double dt = path[i].t - path[i - 1].t;
        const double dz = path[i].z - path[i - 1].z;
        worst = std::min(worst, dt > 0.0 ? -dz / dt : -std::numeric_limits<double>::infinity());
    }
    return {worst > epsilon, worst};
}

inline SlopeCheck check_dsr_assumption(const DsrPath& path, double epsilon) {
    RayPath s, r;
    for (const auto& p : path) {
        s.push_back(p.source);
        r.push_back(p.receiver);
    }
    const SlopeCheck a = check_dsr_assumption(s, epsilon);
    const SlopeCheck b = check_dsr_assumption(r, epsilon);
    return {a.pass && b.pass, std::min(a.worst_slope, b.worst_slope)};
}

}  // namespace wemig
