#pragma once

// Time/frequency convention used everywhere in the library:
//
//   forward   f^(w) = sum_t f(t) exp(-i w t) dt
//   inverse   f(t)  = (1/pi) sum_{w > 0} Re[f^(w) exp(+i w t)] dw
//
// Only strictly positive frequencies below Nyquist are stored. Under this
// convention D_t = -i d/dt acts on spectra as multiplication by w, and
// D_x acts as multiplication by the wavenumber k for the spatial DFT with
// kernel exp(-i k x).

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

#include "wemig/array.hpp"
#include "wemig/fft.hpp"

namespace wemig {

/// Sign of the exponent in the inverse time transform kernel exp(+i w t).
inline constexpr int kInverseTimeKernelSign = +1;

struct FrequencyBand {
    double omega_min = 0.0;  // rad/s
    double omega_max = 0.0;  // rad/s
};

/// Retained positive frequency bins of an nt-sample trace with step dt.
struct FrequencyGrid {
    std::size_t nt = 0;
    double dt = 0.0;
    double domega = 0.0;
    std::size_t k_first = 0;  // DFT index of the first retained bin
    std::size_t count = 0;

    double omega(std::size_t i) const { return domega * static_cast<double>(k_first + i); }
    Axis axis() const { return make_axis(count, domega, omega(0), "omega"); }
};

inline double nyquist(double dt) { return M_PI / dt; }

/// Bins k with omega_min <= k*dw <= omega_max, 0 < k < nt/2. The Nyquist bin
/// is never retained.
inline FrequencyGrid make_frequency_grid(std::size_t nt, double dt, FrequencyBand band) {
    if (nt < 4) throw RangeError("time axis needs at least 4 samples");
    if (!(dt > 0.0)) throw RangeError("time step must be positive");
    if (!(band.omega_min > 0.0) || !(band.omega_max > band.omega_min) ||
        band.omega_max > nyquist(dt) * (1.0 + 1e-12))
        throw RangeError("frequency band must satisfy 0 < omega_min < omega_max <= Nyquist");
    FrequencyGrid g;
    g.nt = nt;
    g.dt = dt;
    g.domega = 2.0 * M_PI / (static_cast<double>(nt) * dt);
    const double eps = 1e-9;
    auto k_lo = static_cast<long long>(std::ceil(band.omega_min / g.domega - eps));
    auto k_hi = static_cast<long long>(std::floor(band.omega_max / g.domega + eps));
    k_lo = std::max<long long>(k_lo, 1);
    k_hi = std::min<long long>(k_hi, static_cast<long long>((nt - 1) / 2));
    if (k_hi < k_lo) throw RangeError("frequency band contains no DFT bin");
    g.k_first = static_cast<std::size_t>(k_lo);
    g.count = static_cast<std::size_t>(k_hi - k_lo + 1);
    return g;
}

namespace detail {

class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n), buf_(n), spec_(n / 2 + 1) {
        std::lock_guard lock(fftw_planner_mutex());
        r2c_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf_.data(), as_fftw(spec_.data()), FFTW_ESTIMATE);
        c2r_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), as_fftw(spec_.data()), buf_.data(), FFTW_ESTIMATE);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    ~RealFft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(r2c_);
        fftw_destroy_plan(c2r_);
    }
    std::vector<double>& time() { return buf_; }
    std::vector<cplx>& spectrum() { return spec_; }
    void forward() { fftw_execute(r2c_); }
    /// Destroys spectrum(); result is the unnormalized Hermitian synthesis.
    void backward() { fftw_execute(c2r_); }

private:
    std::size_t n_;
    std::vector<double> buf_;
    std::vector<cplx> spec_;
    fftw_plan r2c_ = nullptr;
    fftw_plan c2r_ = nullptr;
};

}  // namespace detail

/// Forward transform of every (s, r) trace onto the retained band.
inline SpectrumCube time_to_freq(const DataCube& d, FrequencyBand band) {
    const Axis& ta = d.axis(2);
    const FrequencyGrid fg = make_frequency_grid(ta.n, ta.delta, band);
    const std::size_t ntr = d.axis(0).n * d.axis(1).n;
    SpectrumCube out({d.axis(0), d.axis(1), fg.axis()});
    detail::RealFft fft(ta.n);
    for (std::size_t tr = 0; tr < ntr; ++tr) {
        const double* src = d.values().data() + tr * ta.n;
        std::copy(src, src + ta.n, fft.time().begin());
        fft.forward();
        cplx* dst = out.values().data() + tr * fg.count;
        for (std::size_t i = 0; i < fg.count; ++i) dst[i] = fft.spectrum()[fg.k_first + i] * ta.delta;
    }
    return out;
}

/// Inverse of time_to_freq on its band; the output is real.
inline DataCube freq_to_time(const SpectrumCube& s, std::size_t nt, double dt) {
    const Axis& wa = s.axis(2);
    const double domega = 2.0 * M_PI / (static_cast<double>(nt) * dt);
    if (std::abs(wa.delta - domega) > 1e-9 * domega)
        throw AxisError("spectrum frequency step does not match nt*dt");
    const double kf = wa.origin / domega;
    const auto k_first = static_cast<std::size_t>(std::llround(kf));
    if (std::abs(kf - static_cast<double>(k_first)) > 1e-6 || k_first < 1 ||
        k_first + wa.n - 1 > (nt - 1) / 2)
        throw AxisError("spectrum bins are not strictly inside (0, Nyquist) for this time axis");

    const std::size_t ntr = s.axis(0).n * s.axis(1).n;
    DataCube out({s.axis(0), s.axis(1), make_axis(nt, dt, 0.0, "t")});
    detail::RealFft fft(nt);
    // c2r returns sum_k X_k e^{+i..} over the full Hermitian spectrum, i.e.
    // 2 Re[...] over the positive half; (dw / pi) / 2 = dw / (2 pi).
    const double scale = domega / (2.0 * M_PI);
    for (std::size_t tr = 0; tr < ntr; ++tr) {
        auto& spec = fft.spectrum();
        std::fill(spec.begin(), spec.end(), cplx{});
        const cplx* src = s.values().data() + tr * wa.n;
        for (std::size_t i = 0; i < wa.n; ++i) spec[k_first + i] = src[i];
        fft.backward();
        double* dst = out.values().data() + tr * nt;
        for (std::size_t t = 0; t < nt; ++t) dst[t] = fft.time()[t] * scale;
    }
    return out;
}

/// Analytic-signal envelope of a real trace via the retained-band spectrum
/// (0 < k < n/2), used for picking event times and peak depths.
inline std::vector<double> envelope(std::span<const double> trace) {
    const std::size_t n = trace.size();
    std::vector<cplx> a(trace.begin(), trace.end());
    FftPlan plan(n);
    plan.forward(a);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || (n % 2 == 0 && k == n / 2)) continue;
        a[k] = (k < (n + 1) / 2) ? 2.0 * a[k] : cplx{};
    }
    plan.backward(a);
    std::vector<double> env(n);
    for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(a[i]) / static_cast<double>(n);
    return env;
}

/// Index of the maximum with parabolic sub-sample refinement.
inline double peak_position(std::span<const double> v) {
    if (v.empty()) throw RangeError("peak_position: empty input");
    std::size_t im = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[im]) im = i;
    if (im == 0 || im + 1 == v.size()) return static_cast<double>(im);
    const double a = v[im - 1], b = v[im], c = v[im + 1];
    const double den = a - 2.0 * b + c;
    if (den >= 0.0) return static_cast<double>(im);
    return static_cast<double>(im) + 0.5 * (a - c) / den;
}

}  // namespace wemig
