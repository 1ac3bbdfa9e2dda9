#pragma once

// Amplitude-true reconstruction
//
//   Phi(x, z, D) dc = 2 c0^3 R1 R2 Xi Q^-1 Q^-1 H(0, z)* Q^-1(0) Q^-1(0) D_t^-2 psi d
//
// and the symbol Phi(x, z, xi, zeta) = (2 pi)^-1 int Psi(x, x, z, xi/2 - th,
// xi/2 + th, zeta) d th, where Psi is psi pulled back along DSR rays. The
// (2 pi)^-1 makes Phi the symbol under the usual quantization
// (2 pi)^-2 int e^{i(x xi + z zeta)} Phi u^ d xi d zeta in two dimensions.

#include <algorithm>
#include <cmath>
#include <vector>

#include "wemig/migrate.hpp"
#include "wemig/rays.hpp"

namespace wemig {

struct ReconWeights {
    bool xi_mode = true;
    bool q_inverse_mode = true;
    int dt_inverse_power = -2;
    double omega_floor = 0.0;  // 0 means the lower edge of the mute band
};

/// Xi at row j for one frequency: per-axis leg terms; the 2D weight is
/// leg[a] + leg[b].
inline std::vector<double> xi_legs(const DsrEngine& eng, std::size_t j, double omega) {
    std::vector<double> leg(eng.lateral());
    for (std::size_t a = 0; a < leg.size(); ++a)
        leg[a] = xi_leg_symbol(eng.c_ref(j), omega, eng.wavenumbers()[a], eng.taper());
    return leg;
}

/// Multiply a single-frequency survey field by Xi(z) in the (k_s, k_r)
/// domain, with the row-minimum reference velocity at z.
inline SurveyField xi_weight(const SurveyField& field, const VelocityModel& m, double z, const TaperConfig& tc) {
    const std::size_t ns = field.s.n, nr = field.r.n;
    if (field.u.size() != ns * nr) throw AxisError("xi_weight: field size mismatch");
    const double c_ref = reference_velocity(m, z);
    SurveyField out = field;
    FftPlan plan(ns, nr);
    plan.forward(out.u);
    std::vector<double> ls(ns), lr(nr);
    for (std::size_t a = 0; a < ns; ++a)
        ls[a] = xi_leg_symbol(c_ref, field.omega, dft_wavenumber(a, ns, field.s.delta), tc);
    for (std::size_t b = 0; b < nr; ++b)
        lr[b] = xi_leg_symbol(c_ref, field.omega, dft_wavenumber(b, nr, field.r.delta), tc);
    const double inv = 1.0 / static_cast<double>(ns * nr);
    for (std::size_t a = 0; a < ns; ++a)
        for (std::size_t b = 0; b < nr; ++b) out.u[a * nr + b] *= (ls[a] + lr[b]) * inv;
    plan.backward(out.u);
    return out;
}

namespace detail {

inline SurfaceWeight recon_surface_weight(const DsrEngine& eng, const ReconWeights& w) {
    const double floor = w.omega_floor > 0.0 ? w.omega_floor : eng.mute().omega_min;
    if (eng.mute().omega_min < floor * (1.0 - 1e-12))
        throw ConfigError("recon: mute band reaches below omega_floor");
    return q_surface_weight(eng, w.q_inverse_mode ? -1 : +1, static_cast<double>(w.dt_inverse_power));
}

/// Per-depth k-domain weight: Xi (if on) times Q^-1 Q^-1, or the plain
/// adjoint's Q Q when the inverse is off.
struct DepthWeight {
    std::vector<double> qa;   // per-axis Q factor
    std::vector<double> leg;  // Xi legs, empty when Xi is off
    double operator()(std::size_t a, std::size_t b) const {
        const double q = qa[a] * qa[b];
        return leg.empty() ? q : q * (leg[a] + leg[b]);
    }
};

inline DepthWeight depth_weight(const DsrEngine& eng, std::size_t j, double omega, const ReconWeights& w) {
    DepthWeight dw;
    dw.qa = eng.q_symbols(j, omega, w.q_inverse_mode ? -1 : +1);
    if (w.xi_mode) dw.leg = xi_legs(eng, j, omega);
    return dw;
}

}  // namespace detail

/// Weighted continuation with the full reconstruction chain; the sink sees
/// the plain continued fields, `weighted` receives per depth the k-domain
/// fields after Xi Q^-1 Q^-1.
inline void recon_continue(const DsrEngine& eng, const DataCube& data, const ReconWeights& w,
                           const std::function<void(const DepthFields&, std::span<const std::vector<cplx>>)>& sink) {
    const SpectrumCube spec = detail::data_spectrum(data, eng);
    const std::size_t n = eng.lateral();
    std::vector<std::vector<cplx>> weighted;
    eng.downward(spec, detail::recon_surface_weight(eng, w), [&](const DepthFields& f) {
        weighted.resize(f.count());
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t iw = 0; iw < f.count(); ++iw) {
            const auto dw = detail::depth_weight(eng, f.index, f.omega(iw), w);
            auto& out = weighted[iw];
            out.resize(n * n);
            const auto& g = f.kdom[iw];
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) out[a * n + b] = dw(a, b) * g[a * n + b];
        }
        sink(f, weighted);
    });
}

/// Left-hand side Phi(D) dc of the reconstruction formula on the model grid.
inline Grid2D reconstruct(const DsrEngine& eng, const DataCube& data, const ReconWeights& w = {}) {
    const std::size_t n = eng.lateral();
    Grid2D image(eng.model().axes());
    const double dw_pi = eng.domega() / M_PI;
    recon_continue(eng, data, w, [&](const DepthFields& f, std::span<const std::vector<cplx>> weighted) {
        std::vector<cplx> acc(n, cplx{});
        for (std::size_t iw = 0; iw < f.count(); ++iw) eng.antidiagonal_accumulate(weighted[iw], acc, 1.0);
        const auto diag = eng.diagonal_from_antidiagonal(std::move(acc));
        for (std::size_t i = 0; i < n; ++i) {
            const double c = eng.model()(f.index, i);
            image(f.index, i) = 2.0 * c * c * c * dw_pi * diag[i];
        }
    });
    return image;
}

struct PhiOptions {
    std::size_t n_theta = 64;
    double ray_dz = 2.0;           // depth-tracer step, m
    double slowness_margin = 1.5;  // theta support searched up to margin * cut
};

/// psi evaluated at a surface arrival of a DSR ray.
inline double psi_at_surface(double s0, double r0, double t0, double sigma0, double rho0, double tau,
                             const AcquisitionGeometry& g, const MuteConfig& mute, const TaperConfig& tc) {
    auto aperture = [&](const Axis& a, double x) {
        const double strip = static_cast<double>(tc.edge_width) * a.delta;
        const double d = std::min(x - a.origin, a.last() - x);
        if (d < 0.0) return 0.0;
        return strip > 0.0 ? smooth_step(d / strip) : 1.0;
    };
    if (t0 < 0.0 || t0 > g.t.last()) return 0.0;
    const double w = std::abs(tau);
    return omega_window(w, mute) * dip_window(sigma0 / tau, mute) * dip_window(rho0 / tau, mute) *
           aperture(g.s, s0) * aperture(g.r, r0) * time_window(t0, r0 - s0, mute);
}

/// Phi(x, z, xi, zeta) by trapezoid quadrature over theta. Nodes whose DSR
/// ray does not invert, turns or leaves the model contribute zero.
inline double phi_symbol(double x, double z, double xi, double zeta, const VelocityModel& m,
                         const AcquisitionGeometry& g, const MuteConfig& mute, const TaperConfig& tc,
                         const PhiOptions& opt = {}) {
    if (xi == 0.0 && zeta == 0.0) throw RangeError("phi_symbol: (xi, zeta) must be nonzero");
    if (!(z > 0.0) || opt.n_theta < 2) return 0.0;
    if (zeta < 0.0) {
        xi = -xi;
        zeta = -zeta;
    }
    if (zeta == 0.0) return 0.0;
    const double c = m(x, z);
    const double pmax = std::min(opt.slowness_margin * mute.slowness_cut, 0.999 / c);
    // both legs need |sigma|, |rho| <= pmax tau with tau inside the band
    const double th_max = pmax * mute.omega_max - 0.5 * std::abs(xi);
    if (!(th_max > 0.0)) return 0.0;
    const double dth = 2.0 * th_max / static_cast<double>(opt.n_theta - 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < opt.n_theta; ++k) {
        const double th = -th_max + dth * static_cast<double>(k);
        const double sigma = 0.5 * xi - th, rho = 0.5 * xi + th;
        double tau = 0.0;
        try {
            tau = invert_gamma(x, x, sigma, rho, zeta, z, m);
        } catch (const InversionError&) {
            continue;
        }
        if (std::abs(sigma / tau) > pmax || std::abs(rho / tau) > pmax) continue;
        if (omega_window(std::abs(tau), mute) == 0.0) continue;
        double val = 0.0;
        try {
            DsrRayState st{{x, z, 0.0, sigma, 0.0, tau}, {x, z, 0.0, rho, 0.0, tau}};
            const DsrPath path = trace_dsr_ray(m, st, opt.ray_dz, 0.0);
            const DsrPoint& e = path.back();
            if (std::abs(e.source.z) > 1e-9) continue;
            val = psi_at_surface(e.source.x, e.receiver.x, e.t_total, e.source.xi, e.receiver.xi, tau, g, mute, tc);
        } catch (const TurningPointError&) {
            continue;
        } catch (const EmptyPathError&) {
            continue;
        } catch (const DomainError&) {
            continue;
        }
        const double wk = (k == 0 || k + 1 == opt.n_theta) ? 0.5 : 1.0;
        sum += wk * val;
    }
    return sum * dth / (2.0 * M_PI);
}

enum class DirectionMode { vertical_only, local_dip };

/// Band-center wavenumber magnitude 2 w_c / c0 for a reflector at (x, z).
inline double band_center_wavenumber(const MuteConfig& mute, double c) {
    return 2.0 * 0.5 * (mute.omega_min + mute.omega_max) / c;
}

/// Unit normal (nx, nz), nz >= 0, of the dominant local dip from a smoothed
/// gradient structure tensor of the image.
inline std::pair<double, double> local_dip_direction(const Grid2D& img, std::size_t j, std::size_t i,
                                                     std::size_t half = 3) {
    const std::size_t nz = img.axis(0).n, nx = img.axis(1).n;
    const double dz = img.axis(0).delta, dx = img.axis(1).delta;
    double sxx = 0, sxz = 0, szz = 0;
    for (std::size_t jj = (j > half ? j - half : 1); jj <= std::min(j + half, nz - 2); ++jj)
        for (std::size_t ii = (i > half ? i - half : 1); ii <= std::min(i + half, nx - 2); ++ii) {
            const double gx = (img(jj, ii + 1) - img(jj, ii - 1)) / (2 * dx);
            const double gz = (img(jj + 1, ii) - img(jj - 1, ii)) / (2 * dz);
            sxx += gx * gx;
            sxz += gx * gz;
            szz += gz * gz;
        }
    if (sxx + szz == 0.0) return {0.0, 1.0};
    const double ang = 0.5 * std::atan2(2 * sxz, sxx - szz);
    double ux = std::cos(ang), uz = std::sin(ang);
    if (uz < 0) {
        ux = -ux;
        uz = -uz;
    }
    return {ux, uz};
}

struct NormalizeOptions {
    DirectionMode mode = DirectionMode::vertical_only;
    std::size_t stride = 4;  // Phi evaluated every `stride` samples, bilinear in between
    PhiOptions phi;
};

/// Divide the reconstruction by Phi at the band-center wavenumber in the
/// chosen direction, floored at 1e-3 max Phi.
inline Grid2D normalize_by_phi(const Grid2D& image, const Grid2D& model, const AcquisitionGeometry& g,
                               const MuteConfig& mute, const TaperConfig& tc, const NormalizeOptions& opt = {}) {
    const VelocityModel m(model);
    const Axis &az = image.axis(0), &ax = image.axis(1);
    const std::size_t st = std::max<std::size_t>(1, opt.stride);
    std::vector<std::size_t> jz, ix;
    for (std::size_t j = 0; j < az.n; j += st) jz.push_back(j);
    if (jz.back() != az.n - 1) jz.push_back(az.n - 1);
    for (std::size_t i = 0; i < ax.n; i += st) ix.push_back(i);
    if (ix.back() != ax.n - 1) ix.push_back(ax.n - 1);

    Grid2D coarse({make_axis(jz.size(), 1.0, 0.0, "z"), make_axis(ix.size(), 1.0, 0.0, "x")});
    double pmax = 0.0;
    for (std::size_t a = 0; a < jz.size(); ++a)
        for (std::size_t b = 0; b < ix.size(); ++b) {
            const double x = ax.coord(ix[b]), z = az.coord(jz[a]);
            if (!(z > 0.0)) continue;
            const double kc = band_center_wavenumber(mute, m(x, z));
            double ux = 0.0, uz = 1.0;
            if (opt.mode == DirectionMode::local_dip) std::tie(ux, uz) = local_dip_direction(image, jz[a], ix[b]);
            const double v = phi_symbol(x, z, kc * ux, kc * uz, m, g, mute, tc, opt.phi);
            coarse(a, b) = v;
            pmax = std::max(pmax, v);
        }
    Grid2D out(image.axes());
    if (pmax == 0.0) return out;
    const double floor = 1e-3 * pmax;
    auto locate = [](const std::vector<std::size_t>& nodes, std::size_t k) {
        std::size_t a = 0;
        while (a + 2 < nodes.size() && nodes[a + 1] <= k) ++a;
        const double u = nodes.size() < 2 ? 0.0
                                          : static_cast<double>(k - nodes[a]) /
                                                static_cast<double>(nodes[a + 1] - nodes[a]);
        return std::pair{a, std::clamp(u, 0.0, 1.0)};
    };
    for (std::size_t j = 0; j < az.n; ++j) {
        const auto [a, w] = locate(jz, j);
        for (std::size_t i = 0; i < ax.n; ++i) {
            const auto [b, u] = locate(ix, i);
            const std::size_t a1 = std::min(a + 1, jz.size() - 1), b1 = std::min(b + 1, ix.size() - 1);
            const double phi = (1 - w) * ((1 - u) * coarse(a, b) + u * coarse(a, b1)) +
                               w * ((1 - u) * coarse(a1, b) + u * coarse(a1, b1));
            out(j, i) = image(j, i) / std::max(phi, floor);
        }
    }
    return out;
}

}  // namespace wemig
