#pragma once

// Data cutoff psi: separable smooth windows in frequency and in the dip
// ratios |k_s|/w, |k_r|/w, plus optional linear time mutes. All windows are
// real, so psi is self-adjoint under the data inner products.

#include <cmath>
#include <limits>
#include <vector>

#include "wemig/array.hpp"
#include "wemig/fft.hpp"
#include "wemig/spectral.hpp"
#include "wemig/taper.hpp"

namespace wemig {

struct MuteConfig {
    double slowness_cut = 4.0e-4;  // s/m
    double omega_min = 2.0 * M_PI * 4.0;
    double omega_max = 2.0 * M_PI * 30.0;
    double omega_taper = 0.15;     // ramp width at each band edge, fraction of the band
    double dip_taper = 0.2;        // ramp width below the cut, fraction of the cut

    bool time_mute = false;
    double t_min0 = 0.0;           // t_min(s, r) = t_min0 + t_min_slope |r - s|
    double t_min_slope = 0.0;
    double t_max0 = std::numeric_limits<double>::infinity();
    double t_max_slope = 0.0;
    double t_taper = 0.05;         // s

    FrequencyBand band() const { return {omega_min, omega_max}; }

    void validate() const {
        if (!(slowness_cut > 0.0)) throw ConfigError("mute: slowness_cut must be positive");
        if (!(omega_min > 0.0 && omega_max > omega_min)) throw ConfigError("mute: need 0 < omega_min < omega_max");
        if (!(omega_taper >= 0.0 && omega_taper <= 0.5)) throw ConfigError("mute: omega_taper must lie in [0, 0.5]");
        if (!(dip_taper >= 0.0 && dip_taper <= 1.0)) throw ConfigError("mute: dip_taper must lie in [0, 1]");
        if (time_mute && !(t_taper > 0.0)) throw ConfigError("mute: t_taper must be positive");
    }

    /// The cut must stay inside the propagating cone of the slowest medium.
    void validate_against(double min_velocity) const {
        validate();
        if (!(slowness_cut < 1.0 / min_velocity))
            throw ConfigError("mute: slowness_cut must be below 1 / min(c0)");
    }
};

inline double omega_window(double omega, const MuteConfig& m) {
    const double ramp = m.omega_taper * (m.omega_max - m.omega_min);
    if (omega < m.omega_min || omega > m.omega_max) return 0.0;
    if (ramp <= 0.0) return 1.0;
    return smooth_step((omega - m.omega_min) / ramp) * smooth_step((m.omega_max - omega) / ramp);
}

/// Dip window in slowness p = |k| / w: 1 up to cut (1 - dip_taper), zero at
/// and beyond the cut.
inline double dip_window(double slowness, const MuteConfig& m) {
    const double p = std::abs(slowness);
    if (p >= m.slowness_cut) return 0.0;
    const double ramp = m.dip_taper * m.slowness_cut;
    if (ramp <= 0.0) return 1.0;
    return smooth_step((m.slowness_cut - p) / ramp);
}

inline double time_window(double t, double offset, const MuteConfig& m) {
    if (!m.time_mute) return 1.0;
    const double lo = m.t_min0 + m.t_min_slope * std::abs(offset);
    const double hi = m.t_max0 + m.t_max_slope * std::abs(offset);
    return smooth_step((t - lo) / m.t_taper) * smooth_step((hi - t) / m.t_taper);
}

/// Dip window for every DFT bin of an n-point axis at frequency w.
inline std::vector<double> dip_window_bins(std::size_t n, double delta, double omega, const MuteConfig& m) {
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = dip_window(dft_wavenumber(j, n, delta) / omega, m);
    return w;
}

/// Linear time mutes, in place.
inline void apply_time_mute(DataCube& d, const MuteConfig& m) {
    if (!m.time_mute) return;
    const Axis &as = d.axis(0), &ar = d.axis(1), &at = d.axis(2);
    for (std::size_t i = 0; i < as.n; ++i)
        for (std::size_t j = 0; j < ar.n; ++j) {
            const double off = ar.coord(j) - as.coord(i);
            double* tr = &d(i, j, std::size_t{0});
            for (std::size_t k = 0; k < at.n; ++k) tr[k] *= time_window(at.coord(k), off, m);
        }
}

/// Frequency and dip windows on a spectrum cube.
inline SpectrumCube apply_mute_psi(const SpectrumCube& spec, const MuteConfig& m) {
    m.validate();
    const Axis &as = spec.axis(0), &ar = spec.axis(1), &aw = spec.axis(2);
    SpectrumCube out(spec.axes());
    FftPlan plan(as.n, ar.n);
    std::vector<cplx> f(as.n * ar.n);
    const double inv = 1.0 / static_cast<double>(as.n * ar.n);
    for (std::size_t iw = 0; iw < aw.n; ++iw) {
        const double omega = aw.coord(iw);
        const double ww = omega_window(omega, m);
        if (ww == 0.0) continue;
        for (std::size_t i = 0; i < as.n; ++i)
            for (std::size_t j = 0; j < ar.n; ++j) f[i * ar.n + j] = spec(i, j, iw);
        plan.forward(f);
        const auto ds = dip_window_bins(as.n, as.delta, omega, m);
        const auto dr = dip_window_bins(ar.n, ar.delta, omega, m);
        for (std::size_t a = 0; a < as.n; ++a)
            for (std::size_t b = 0; b < ar.n; ++b) f[a * ar.n + b] *= ww * ds[a] * dr[b] * inv;
        plan.backward(f);
        for (std::size_t i = 0; i < as.n; ++i)
            for (std::size_t j = 0; j < ar.n; ++j) out(i, j, iw) = f[i * ar.n + j];
    }
    return out;
}

}  // namespace wemig
