#pragma once

// Data-domain annihilator W = K M K~* and the differential-semblance scan.
//
//   K* d      = (dw / pi) Re sum_w H(0, z)* psi d          on (z, s, r)
//   K~* d     = 2 c0((s + r)/2, z)^3 times the reconstruction chain, no
//               diagonal restriction
//   M u       = (r - s) u
//   K         = exact discrete adjoint of K* (inner products ds dr dz and
//               ds dr dt)

#include <algorithm>
#include <cmath>
#include <vector>

#include "wemig/angle.hpp"

namespace wemig {

/// Real field on (z, s, r).
using SunkField = NdArray<double, 3>;

namespace detail {

inline SunkField sunk_field_for(const DsrEngine& eng) {
    const auto& g = eng.geometry();
    return SunkField({eng.model().axis(0), g.s, g.r});
}

/// (dw / pi) Re sum_w of space fields into row j.
inline void sum_frequencies(const DsrEngine& eng, std::span<const std::vector<cplx>> fields, SunkField& out,
                            std::size_t j) {
    const std::size_t nn = eng.lateral() * eng.lateral();
    double* row = &out(j, std::size_t{0}, std::size_t{0});
    for (const auto& u : fields)
        for (std::size_t k = 0; k < nn; ++k) row[k] += u[k].real();
    const double scale = eng.domega() / M_PI;
    for (std::size_t k = 0; k < nn; ++k) row[k] *= scale;
}

}  // namespace detail

/// K* d: every depth row of the continued data at t = 0.
inline SunkField k_star(const DsrEngine& eng, const DataCube& data) {
    SunkField out = detail::sunk_field_for(eng);
    const SpectrumCube spec = detail::data_spectrum(data, eng);
    eng.downward(spec, unit_weight(eng.lateral()),
                 [&](const DepthFields& f) { detail::sum_frequencies(eng, f.space, out, f.index); });
    return out;
}

/// K u: inject dz u_j at t = 0 at every depth and continue to the surface.
inline DataCube k_forward(const DsrEngine& eng, const SunkField& u) {
    const auto& g = eng.geometry();
    if (!same_sampling(u.axis(0), eng.model().axis(0)) || !same_sampling(u.axis(1), g.s) ||
        !same_sampling(u.axis(2), g.r))
        throw AxisError("sunk field does not match the engine grid");
    const std::size_t n = eng.lateral(), nz = eng.depths();
    std::vector<std::vector<cplx>> uhat(nz);
    for (std::size_t j = 0; j < nz; ++j) {
        const double* row = &u(j, std::size_t{0}, std::size_t{0});
        if (std::all_of(row, row + n * n, [](double v) { return v == 0.0; })) continue;
        std::vector<cplx> f(n * n);
        for (std::size_t k = 0; k < n * n; ++k) f[k] = eng.dz() * row[k];
        eng.plan2().forward(f);
        uhat[j] = std::move(f);
    }
    auto src = [&](std::size_t j, std::size_t, double, std::span<cplx> khat) {
        if (uhat[j].empty()) return;
        const auto& h = uhat[j];
        for (std::size_t k = 0; k < h.size(); ++k) khat[k] += h[k];
    };
    return detail::spectrum_to_data(eng.upward(src, unit_weight(n)), eng);
}

/// K~* d on the full (s, r) plane per depth.
inline SunkField ktilde_star(const DsrEngine& eng, const DataCube& data, const ReconWeights& w = {}) {
    SunkField out = detail::sunk_field_for(eng);
    const std::size_t n = eng.lateral();
    std::vector<std::vector<cplx>> space;
    recon_continue(eng, data, w, [&](const DepthFields& f, std::span<const std::vector<cplx>> weighted) {
        space.assign(weighted.begin(), weighted.end());
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t iw = 0; iw < space.size(); ++iw) eng.plan2().backward(space[iw]);
        const std::size_t j = f.index;
        detail::sum_frequencies(eng, space, out, j);
        std::vector<double> c3(2 * n - 1);  // 2 c0^3 at the midpoint index (a + b) / 2
        for (std::size_t m = 0; m < c3.size(); ++m) {
            const double c = 0.5 * (eng.model()(j, m / 2) + eng.model()(j, (m + 1) / 2));
            c3[m] = 2.0 * c * c * c;
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) out(j, a, b) *= c3[a + b];
    });
    return out;
}

/// Multiplication by r - s in metres.
inline SunkField apply_offset_mult(const SunkField& u) {
    SunkField out = u;
    const Axis &as = u.axis(1), &ar = u.axis(2);
    for (std::size_t j = 0; j < u.axis(0).n; ++j)
        for (std::size_t a = 0; a < as.n; ++a)
            for (std::size_t b = 0; b < ar.n; ++b) out(j, a, b) *= ar.coord(b) - as.coord(a);
    return out;
}

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// W d = K M K~* d.
inline DataCube annihilate(const DsrEngine& eng, const DataCube& data, const ReconWeights& w = {}) {
    return k_forward(eng, apply_offset_mult(ktilde_star(eng, data, w)));
}

struct AnnihilatorResidual {
    DataCube wd;
    double norm_wd = 0.0;
    double norm_kk = 0.0;   // |K K~* d|
    double h_ref = 0.0;     // largest |r - s|, the norm of M
    double ratio = 0.0;     // norm_wd / (h_ref norm_kk)
};

inline AnnihilatorResidual annihilator_residual(const DsrEngine& eng, const DataCube& data,
                                                const ReconWeights& w = {}) {
    const SunkField kt = ktilde_star(eng, data, w);
    AnnihilatorResidual res;
    res.wd = k_forward(eng, apply_offset_mult(kt));
    const DataCube kk = k_forward(eng, kt);
    res.norm_wd = norm2(res.wd.values());
    res.norm_kk = norm2(kk.values());
    const Axis &as = eng.geometry().s, &ar = eng.geometry().r;
    res.h_ref = std::max(std::abs(ar.last() - as.coord(0)), std::abs(ar.coord(0) - as.last()));
    res.ratio = res.norm_kk > 0.0 ? res.norm_wd / (res.h_ref * res.norm_kk) : 0.0;
    return res;
}

struct ScanPoint {
    double scale = 1.0;
    double j = 0.0;
};

struct SemblanceScan {
    std::vector<ScanPoint> points;
    std::size_t argmin = 0;
};

/// J(scale) = |W[scale c0] d|^2 / |d|^2 for each scaled background.
inline SemblanceScan semblance_scan(const DataCube& data, const Grid2D& model, const AcquisitionGeometry& g,
                                    const MuteConfig& mute, const TaperConfig& tc, const std::vector<double>& scales,
                                    const ReconWeights& w = {}) {
    if (scales.empty()) throw RangeError("semblance scan needs at least one scale");
    const double dn = norm2(data.values());
    if (!(dn > 0.0)) throw DataError("semblance scan: data are zero");
    SemblanceScan out;
    for (double s : scales) {
        if (!(s > 0.0)) throw RangeError("semblance scan: scales must be positive");
        Grid2D m = model;
        for (double& v : m.storage()) v *= s;
        DsrEngine eng(m, g, tc, mute);
        const double r = norm2(annihilate(eng, data, w).values()) / dn;
        out.points.push_back({s, r * r});
    }
    for (std::size_t k = 1; k < out.points.size(); ++k)
        if (out.points[k].j < out.points[out.argmin].j) out.argmin = k;
    return out;
}

/// Scale list lo, lo + step, ..., hi (inclusive up to rounding).
inline std::vector<double> scan_scales(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo) || !(lo > 0.0)) throw RangeError("scan range must satisfy 0 < lo <= hi, step > 0");
    std::vector<double> s;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < n; ++k) s.push_back(lo + step * static_cast<double>(k));
    return s;
}

/// d/dp along the gather's p axis: centered inside, one-sided at the ends.
inline AngleGather dp_annihilate(const AngleGather& g) {
    const Axis& ap = g.axis(2);
    if (ap.n < 3) throw AxisError("dp_annihilate needs at least 3 p samples");
    AngleGather out(g.axes());
    const std::size_t nzx = g.axis(0).n * g.axis(1).n, np = ap.n;
    const double inv = 1.0 / ap.delta;
    for (std::size_t k = 0; k < nzx; ++k) {
        const double* in = g.values().data() + k * np;
        double* o = out.values().data() + k * np;
        o[0] = (in[1] - in[0]) * inv;
        for (std::size_t ip = 1; ip + 1 < np; ++ip) o[ip] = 0.5 * (in[ip + 1] - in[ip - 1]) * inv;
        o[np - 1] = (in[np - 1] - in[np - 2]) * inv;
    }
    return out;
}

/// |d_p G| / |G| over interior p samples.
inline double dp_ratio(const AngleGather& g) {
    const AngleGather d = dp_annihilate(g);
    const std::size_t nzx = g.axis(0).n * g.axis(1).n, np = g.axis(2).n;
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < nzx; ++k)
        for (std::size_t ip = 1; ip + 1 < np; ++ip) {
            a += d.values()[k * np + ip] * d.values()[k * np + ip];
            b += g.values()[k * np + ip] * g.values()[k * np + ip];
        }
    if (!(b > 0.0)) throw DataError("dp_ratio: gather is zero");
    return std::sqrt(a / b);
}

}  // namespace wemig
