#pragma once

// Born modeling F and its exact discrete adjoint.
//
// Per frequency the source at depth row j is the diagonal
//   v(s = r = x) = 1/2 w^2 c0^-3 dc dz / ds
// weighted by Q(s) Q(r), injected and continued upward; at the surface the
// data take Q(s) Q(r) at z = 0 and psi. Inner products: model sum * dx dz,
// data sum * ds dr dt.

#include <cmath>
#include <vector>

#include "wemig/dsr.hpp"

namespace wemig {

namespace detail {

inline void check_model_grid(const Grid2D& g, const DsrEngine& eng, const char* what) {
    if (!same_sampling(g.axis(0), eng.model().axis(0)) || !same_sampling(g.axis(1), eng.model().axis(1)))
        throw AxisError(std::string(what) + " must share the model grid");
}

inline void check_data_cube(const DataCube& d, const DsrEngine& eng) {
    const auto& g = eng.geometry();
    if (!same_sampling(d.axis(0), g.s) || !same_sampling(d.axis(1), g.r) || !same_sampling(d.axis(2), g.t))
        throw AxisError("data cube does not match the acquisition geometry");
}

inline SurfaceWeight q_surface_weight(const DsrEngine& eng, int power, double omega_power = 0.0) {
    return [&eng, power, omega_power](std::size_t, double omega) {
        auto q = eng.q_symbols(0, omega, power);
        const double f = std::pow(omega, 0.5 * omega_power);
        for (double& v : q) v *= f;
        return q;
    };
}

inline SpectrumCube data_spectrum(const DataCube& data, const DsrEngine& eng) {
    check_data_cube(data, eng);
    DataCube d = data;
    apply_time_mute(d, eng.mute());
    return time_to_freq(d, eng.mute().band());
}

inline DataCube spectrum_to_data(const SpectrumCube& spec, const DsrEngine& eng) {
    const auto& t = eng.geometry().t;
    DataCube d = freq_to_time(spec, t.n, t.delta);
    apply_time_mute(d, eng.mute());
    return d;
}

}  // namespace detail

inline DataCube born_model(const DsrEngine& eng, const Grid2D& dc) {
    detail::check_model_grid(dc, eng, "perturbation");
    if (!dc.all_finite()) throw DataError("perturbation holds non-finite samples");
    const std::size_t n = eng.lateral(), nz = eng.depths();
    for (std::size_t i = 0; i < n; ++i)
        if (dc(std::size_t{0}, i) != 0.0) throw ContractError("perturbation must vanish at the surface row z = 0");

    // FFT of c0^-3 dc per depth row, shared by all frequencies.
    std::vector<std::vector<cplx>> vhat(nz);
    for (std::size_t j = 1; j < nz; ++j) {
        std::vector<cplx> v(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = eng.model()(j, i);
            v[i] = dc(j, i) / (c * c * c);
            any = any || v[i] != 0.0;
        }
        if (!any) continue;
        eng.plan1().forward(v);
        vhat[j] = std::move(v);
    }
    const double geom = eng.dz() / eng.geometry().s.delta;
    auto src = [&](std::size_t j, std::size_t, double omega, std::span<cplx> f) {
        if (vhat[j].empty()) return;
        const auto q = eng.q_symbols(j, omega, +1);
        const double amp = 0.5 * omega * omega * geom;
        const auto& vh = vhat[j];
        for (std::size_t a = 0; a < n; ++a) {
            const double qa = amp * q[a];
            for (std::size_t b = 0; b < n; ++b) {
                std::size_t m = a + b;
                if (m >= n) m -= n;
                f[a * n + b] += qa * q[b] * vh[m];
            }
        }
    };
    const SpectrumCube spec = eng.upward(src, detail::q_surface_weight(eng, +1));
    return detail::spectrum_to_data(spec, eng);
}

/// F* d, row by row from the downward-continued fields.
inline Grid2D migrate_adjoint(const DsrEngine& eng, const DataCube& data) {
    const SpectrumCube spec = detail::data_spectrum(data, eng);
    const std::size_t n = eng.lateral();
    Grid2D image(eng.model().axes());
    const double dw_pi = eng.domega() / M_PI;
    eng.downward(spec, detail::q_surface_weight(eng, +1), [&](const DepthFields& f) {
        if (f.index == 0) return;
        std::vector<cplx> acc(n, cplx{});
        for (std::size_t iw = 0; iw < f.count(); ++iw) {
            const double omega = f.omega(iw);
            const auto q = eng.q_symbols(f.index, omega, +1);
            const auto& g = f.kdom[iw];
            for (std::size_t a = 0; a < n; ++a) {
                const double qa = omega * omega * q[a];
                for (std::size_t b = 0; b < n; ++b) {
                    std::size_t m = a + b;
                    if (m >= n) m -= n;
                    acc[m] += qa * q[b] * g[a * n + b];
                }
            }
        }
        const auto diag = eng.diagonal_from_antidiagonal(std::move(acc));
        for (std::size_t i = 0; i < n; ++i) {
            const double c = eng.model()(f.index, i);
            image(f.index, i) = 0.5 / (c * c * c) * dw_pi * diag[i];
        }
    });
    return image;
}

/// Zero traces outside the (s, r) mask, with a sin^2 ramp over taper_cells
/// samples inside the mask edge.
inline DataCube zero_pad_missing(const DataCube& data, const std::vector<std::uint8_t>& mask,
                                 std::size_t taper_cells = 2) {
    const std::size_t ns = data.axis(0).n, nr = data.axis(1).n, nt = data.axis(2).n;
    if (mask.size() != ns * nr) throw AxisError("mask shape does not match the (s, r) plane");
    DataCube out = data;
    const auto w = static_cast<long long>(taper_cells);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nr; ++j) {
            double weight = 0.0;
            if (mask[i * nr + j]) {
                long long dist = w + 1;
                for (long long di = -w; di <= w; ++di)
                    for (long long dj = -w; dj <= w; ++dj) {
                        const long long a = static_cast<long long>(i) + di, b = static_cast<long long>(j) + dj;
                        if (a < 0 || b < 0 || a >= static_cast<long long>(ns) || b >= static_cast<long long>(nr))
                            continue;
                        if (!mask[static_cast<std::size_t>(a) * nr + static_cast<std::size_t>(b)])
                            dist = std::min(dist, std::max(std::abs(di), std::abs(dj)));
                    }
                weight = smooth_step(static_cast<double>(dist) / static_cast<double>(w + 1));
            }
            double* tr = &out(i, j, std::size_t{0});
            for (std::size_t k = 0; k < nt; ++k) tr[k] *= weight;
        }
    return out;
}

}  // namespace wemig
