#pragma once

// Angle-domain common image gathers in the ray parameter p:
//
//   G(x, z, p) = sum_h chi(h) (dw / pi) sum_w Re[U_w(x - h/2, x + h/2; z) e^{i w p h}] dh
//
// with h on multiples of the lateral step; odd multiples put x -/+ h/2 on
// half-grid points, where U is the average of the four neighbours.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "wemig/recon.hpp"
#include "wemig/taper.hpp"

namespace wemig {

/// Gather on (z, x, p).
using AngleGather = NdArray<double, 3>;

struct AngleConfig {
    Axis p = make_axis(1, 1e-5, 0.0, "p");
    double chi_radius = 200.0;     // m
    double chi_flat_fraction = 0.5;
    std::size_t x_first = 0;       // lateral subset of the output
    std::size_t x_count = 0;       // 0 means through the last sample
    std::size_t x_stride = 1;
};

inline Axis p_axis(double p_min, double p_max, std::size_t np) {
    if (np == 0) throw RangeError("p axis needs at least one sample");
    if (np == 1) return make_axis(1, 1e-6, p_min, "p");
    if (!(p_max > p_min)) throw RangeError("p axis needs p_max > p_min");
    return make_axis(np, (p_max - p_min) / static_cast<double>(np - 1), p_min, "p");
}

struct GuardReport {
    bool pass = false;
    double c_max = 0.0;
    double bound = 0.0;       // 1 / (2 c_max)
    double p_abs_max = 0.0;
    double c1 = 0.0;          // max |d(c^-2)/dx|
    double r_proxy = 0.0;     // R C1 c_max^2
    bool r_warning = false;
};

/// Aperture bound max |p| < 1 / (2 max c0), checked strictly, plus the
/// warn-only radius heuristic R C1 C0^2 <= 0.1.
inline GuardReport check_pmax(const Grid2D& model, const Axis& p, double radius = 0.0) {
    GuardReport g;
    const Axis& az = model.axis(0);
    const Axis& ax = model.axis(1);
    for (double c : model.values()) g.c_max = std::max(g.c_max, c);
    if (!(g.c_max > 0.0)) throw DataError("velocity model must be positive");
    g.bound = 0.5 / g.c_max;
    g.p_abs_max = std::max(std::abs(p.coord(0)), std::abs(p.last()));
    g.pass = g.p_abs_max < g.bound;
    if (ax.n > 1)
        for (std::size_t j = 0; j < az.n; ++j)
            for (std::size_t i = 0; i + 1 < ax.n; ++i) {
                const double a = model(j, i), b = model(j, i + 1);
                g.c1 = std::max(g.c1, std::abs(1.0 / (b * b) - 1.0 / (a * a)) / ax.delta);
            }
    g.r_proxy = radius * g.c1 * g.c_max * g.c_max;
    g.r_warning = g.r_proxy > 0.1;
    return g;
}

/// Throws ConfigError when the p axis violates the aperture bound.
inline GuardReport guard_pmax(const Grid2D& model, const Axis& p, double radius = 0.0) {
    GuardReport g = check_pmax(model, p, radius);
    if (!g.pass)
        throw ConfigError("angle: max |p| = " + std::to_string(g.p_abs_max) + " s/m must stay below 1/(2 max c0) = " +
                          std::to_string(g.bound) + " s/m");
    return g;
}

namespace detail {

struct GatherPlan {
    std::vector<std::size_t> xs;   // output columns (lateral indices)
    long long m_max = 0;           // offsets h = m ds, |m| <= m_max
    std::vector<double> chi;       // 2 m_max + 1 weights
    Axis x_axis;
};

inline GatherPlan gather_plan(const DsrEngine& eng, const AngleConfig& cfg) {
    if (!(cfg.chi_radius >= 0.0)) throw RangeError("angle: chi radius must be nonnegative");
    if (cfg.x_stride == 0) throw RangeError("angle: x stride must be positive");
    const std::size_t n = eng.lateral();
    if (cfg.x_first >= n) throw RangeError("angle: x subset starts outside the grid");
    GatherPlan gp;
    const std::size_t avail = (n - cfg.x_first + cfg.x_stride - 1) / cfg.x_stride;
    const std::size_t cnt = cfg.x_count == 0 ? avail : std::min(cfg.x_count, avail);
    for (std::size_t k = 0; k < cnt; ++k) gp.xs.push_back(cfg.x_first + k * cfg.x_stride);
    const Axis& s = eng.geometry().s;
    gp.x_axis = make_axis(cnt, s.delta * static_cast<double>(cfg.x_stride), s.coord(cfg.x_first), "x");
    gp.m_max = static_cast<long long>(std::floor(cfg.chi_radius / s.delta + 1e-9));
    gp.chi = build_taper(static_cast<std::size_t>(2 * gp.m_max + 1), cfg.chi_flat_fraction);
    return gp;
}

/// Field value at (s, r) = (i - m/2, i + m/2); false when off the grid.
inline bool offset_sample(const std::vector<cplx>& u, std::size_t n, std::size_t i, long long m, cplx& out) {
    const long long ii = static_cast<long long>(i), nn = static_cast<long long>(n);
    if (m % 2 == 0) {
        const long long s = ii - m / 2, r = ii + m / 2;
        if (s < 0 || r < 0 || s >= nn || r >= nn) return false;
        out = u[static_cast<std::size_t>(s * nn + r)];
        return true;
    }
    // 2s = 2i - m, 2r = 2i + m, both odd
    const long long s0 = (2 * ii - m - 1) / 2, r0 = (2 * ii + m - 1) / 2;
    if (s0 < 0 || r0 < 0 || s0 + 1 >= nn || r0 + 1 >= nn) return false;
    const auto at = [&](long long a, long long b) { return u[static_cast<std::size_t>(a * nn + b)]; };
    out = 0.25 * (at(s0, r0) + at(s0, r0 + 1) + at(s0 + 1, r0) + at(s0 + 1, r0 + 1));
    return true;
}

/// Accumulates gather rows from space-domain fields, one depth at a time.
class GatherBuilder {
public:
    GatherBuilder(const DsrEngine& eng, const AngleConfig& cfg)
        : eng_(eng), cfg_(cfg), gp_(gather_plan(eng, cfg)),
          out_({eng.model().axis(0), gp_.x_axis, cfg.p}) {
        const auto& fr = eng.freqs();
        const std::size_t nm = gp_.chi.size(), np = cfg.p.n;
        phase_.resize(np * nm * fr.count);
        const double ds = eng.geometry().s.delta;
        for (std::size_t ip = 0; ip < np; ++ip)
            for (std::size_t k = 0; k < nm; ++k) {
                const double h = static_cast<double>(static_cast<long long>(k) - gp_.m_max) * ds;
                const double ph = cfg.p.coord(ip) * h;
                for (std::size_t iw = 0; iw < fr.count; ++iw)
                    phase_[(ip * nm + k) * fr.count + iw] = std::polar(1.0, fr.omega(iw) * ph);
            }
    }

    /// Row j from fields[iw] (space domain, row-major (s, r)), each column
    /// scaled by col_scale[x] when given.
    void add_depth(std::size_t j, std::span<const std::vector<cplx>> fields,
                   const std::vector<double>* col_scale = nullptr) {
        const std::size_t n = eng_.lateral(), nw = fields.size(), nm = gp_.chi.size(), np = cfg_.p.n;
        const double scale = eng_.domega() / M_PI;
#pragma omp parallel for schedule(static)
        for (std::size_t ix = 0; ix < gp_.xs.size(); ++ix) {
            const std::size_t i = gp_.xs[ix];
            std::vector<cplx> v(nw);
            std::vector<double> acc(np, 0.0);
            for (std::size_t k = 0; k < nm; ++k) {
                const long long m = static_cast<long long>(k) - gp_.m_max;
                bool inside = true;
                for (std::size_t iw = 0; iw < nw && inside; ++iw) inside = offset_sample(fields[iw], n, i, m, v[iw]);
                if (!inside) continue;
                for (std::size_t ip = 0; ip < np; ++ip) {
                    const cplx* e = &phase_[(ip * nm + k) * nw];
                    double sum = 0.0;
                    for (std::size_t iw = 0; iw < nw; ++iw)
                        sum += v[iw].real() * e[iw].real() - v[iw].imag() * e[iw].imag();
                    acc[ip] += gp_.chi[k] * sum;
                }
            }
            const double cs = col_scale ? (*col_scale)[i] : 1.0;
            for (std::size_t ip = 0; ip < np; ++ip) out_(j, ix, ip) = acc[ip] * scale * cs;
        }
    }

    AngleGather take() { return std::move(out_); }

private:
    const DsrEngine& eng_;
    AngleConfig cfg_;
    GatherPlan gp_;
    AngleGather out_;
    std::vector<cplx> phase_;
};

}  // namespace detail

/// Gather from downward-continued data H(0, z)* psi d.
inline AngleGather awe_transform(const DsrEngine& eng, const DataCube& data, const AngleConfig& cfg) {
    guard_pmax(eng.model(), cfg.p, cfg.chi_radius);
    detail::GatherBuilder gb(eng, cfg);
    downward_continue(data, eng, [&](const DepthFields& f) { gb.add_depth(f.index, f.space); });
    return gb.take();
}

/// Amplitude-corrected gather: the reconstruction chain (Xi, Q^-1 weights,
/// D_t power, 2 c0^3) before the offset and p evaluation.
inline AngleGather awe_tilde_transform(const DsrEngine& eng, const DataCube& data, const AngleConfig& cfg,
                                       const ReconWeights& w = {}) {
    guard_pmax(eng.model(), cfg.p, cfg.chi_radius);
    detail::GatherBuilder gb(eng, cfg);
    const std::size_t n = eng.lateral();
    std::vector<std::vector<cplx>> space;
    std::vector<double> c3(n);
    recon_continue(eng, data, w, [&](const DepthFields& f, std::span<const std::vector<cplx>> weighted) {
        space.assign(weighted.begin(), weighted.end());
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t iw = 0; iw < space.size(); ++iw) eng.plan2().backward(space[iw]);
        for (std::size_t i = 0; i < n; ++i) {
            const double c = eng.model()(f.index, i);
            c3[i] = 2.0 * c * c * c;
        }
        gb.add_depth(f.index, space, &c3);
    });
    return gb.take();
}

struct Flatness {
    double metric = 0.0;              // cells
    std::vector<double> z_peak;       // m, per p sample
    std::vector<bool> used;           // inside the p range
};

/// Envelope-peak depth per p of the gather stacked over the x columns
/// [x_begin, x_end); metric = max |z_peak(p) - z_peak(p nearest 0)| in depth
/// cells over |p| <= p_limit (all p when p_limit <= 0).
inline Flatness flatness_metric(const AngleGather& g, std::size_t x_begin, std::size_t x_end, double p_limit = 0.0) {
    const Axis &az = g.axis(0), &ax = g.axis(1), &ap = g.axis(2);
    if (x_begin >= x_end || x_end > ax.n) throw RangeError("flatness: empty or out-of-range x window");
    Flatness fl;
    fl.z_peak.assign(ap.n, 0.0);
    fl.used.assign(ap.n, false);
    std::size_t i0 = 0;
    for (std::size_t ip = 0; ip < ap.n; ++ip)
        if (std::abs(ap.coord(ip)) < std::abs(ap.coord(i0))) i0 = ip;
    std::vector<double> trace(az.n);
    for (std::size_t ip = 0; ip < ap.n; ++ip) {
        double norm = 0.0;
        for (std::size_t j = 0; j < az.n; ++j) {
            double s = 0.0;
            for (std::size_t i = x_begin; i < x_end; ++i) s += g(j, i, ip);
            trace[j] = s;
            norm = std::max(norm, std::abs(s));
        }
        if (norm == 0.0) throw DataError("flatness: gather window is zero at p = " + std::to_string(ap.coord(ip)));
        fl.z_peak[ip] = az.coord(0) + az.delta * peak_position(envelope(trace));
        fl.used[ip] = p_limit <= 0.0 || std::abs(ap.coord(ip)) <= p_limit * (1.0 + 1e-12);
    }
    for (std::size_t ip = 0; ip < ap.n; ++ip)
        if (fl.used[ip]) fl.metric = std::max(fl.metric, std::abs(fl.z_peak[ip] - fl.z_peak[i0]) / az.delta);
    return fl;
}

/// Worst ratio over p of the largest |G| outside a depth band of
/// +-half_band cells around z_true to the column peak, at column x.
inline double off_band_ratio(const AngleGather& g, std::size_t x, double z_true, std::size_t half_band) {
    const Axis &az = g.axis(0), &ap = g.axis(2);
    const double jt = az.index_of(z_true);
    double worst = 0.0;
    for (std::size_t ip = 0; ip < ap.n; ++ip) {
        double peak = 0.0, out = 0.0;
        for (std::size_t j = 0; j < az.n; ++j) {
            const double v = std::abs(g(j, x, ip));
            peak = std::max(peak, v);
            if (std::abs(static_cast<double>(j) - jt) > static_cast<double>(half_band)) out = std::max(out, v);
        }
        if (peak > 0.0) worst = std::max(worst, out / peak);
    }
    return worst;
}

}  // namespace wemig
