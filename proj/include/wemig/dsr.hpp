#pragma once

// Survey sinking with the double-square-root step on (s, r) per frequency.
//
// Fields live on the model's lateral grid in both s and r. One upward DSR
// step from depth row j to row j - 1 is
//
//   W <- (T P (x) T P) . IFFT2 . (M (x) M) / N^2 . FFT2 W
//
// i.e. an s-step followed by an r-step of the split-step kernel. Downward
// continuation is its exact conjugate transpose.
//
// Wavenumber-domain fields handed to sinks are normalized so that the space
// field equals the unnormalized inverse FFT2 of the wavenumber field.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wemig/array.hpp"
#include "wemig/fft.hpp"
#include "wemig/geometry.hpp"
#include "wemig/mute.hpp"
#include "wemig/spectral.hpp"
#include "wemig/ssr.hpp"
#include "wemig/velocity.hpp"

namespace wemig {

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// One frequency of the DSR wavefield at depth z, row-major over (s, r).
struct SurveyField {
    double omega = 0.0;
    double z = 0.0;
    Axis s;
    Axis r;
    std::vector<cplx> u;
};

/// All retained frequencies at one depth row.
struct DepthFields {
    std::size_t index = 0;
    double z = 0.0;
    std::size_t n = 0;  // lateral samples per axis
    const FrequencyGrid* freqs = nullptr;
    std::span<const std::vector<cplx>> space;
    std::span<const std::vector<cplx>> kdom;

    double omega(std::size_t iw) const { return freqs->omega(iw); }
    std::size_t count() const { return space.size(); }
};

using DepthSink = std::function<void(const DepthFields&)>;

/// Adds a source to the unnormalized FFT2 of the field at depth row j.
using UpwardSource = std::function<void(std::size_t j, std::size_t iw, double omega, std::span<cplx> khat)>;

/// Separable real surface weight: the bin (a, b) is scaled by v[a] * v[b]
/// where v is the returned per-axis factor.
using SurfaceWeight = std::function<std::vector<double>(std::size_t iw, double omega)>;

class DsrEngine {
public:
    DsrEngine(const Grid2D& c0, const AcquisitionGeometry& g, const TaperConfig& tc, const MuteConfig& mute)
        : c0_(c0), model_(c0_), geom_(g), tc_(tc), mute_(mute) {
        check_geometry(g, c0);
        if (!same_sampling(g.s, g.r)) throw AxisError("source and receiver axes must coincide");
        tc.validate();
        mute.validate_against(model_.min_velocity());
        freqs_ = make_frequency_grid(g.t.n, g.t.delta, mute.band());
        n_ = g.s.n;
        nz_ = g.depth_count();
        dx_ = g.s.delta;
        dz_ = g.dz;
        k_ = dft_wavenumbers(n_, dx_);
        edge_ = edge_profile(n_, tc);
        plan_ = std::make_unique<FftPlan>(n_, n_);
        plan1_ = std::make_unique<FftPlan>(n_);
        c_mid_.resize(nz_);
        c_ref_step_.assign(nz_, 0.0);
        c_ref_row_.resize(nz_);
        for (std::size_t j = 0; j < nz_; ++j) {
            c_ref_row_[j] = model_.row_min(j);
            if (j == 0) continue;
            c_mid_[j].resize(n_);
            for (std::size_t i = 0; i < n_; ++i) c_mid_[j][i] = 0.5 * (c0(j, i) + c0(j - 1, i));
            c_ref_step_[j] = *std::min_element(c_mid_[j].begin(), c_mid_[j].end());
        }
    }

    DsrEngine(const DsrEngine&) = delete;
    DsrEngine& operator=(const DsrEngine&) = delete;

    const Grid2D& model() const { return c0_; }
    const VelocityModel& velocity() const { return model_; }
    const AcquisitionGeometry& geometry() const { return geom_; }
    const TaperConfig& taper() const { return tc_; }
    const MuteConfig& mute() const { return mute_; }
    const FrequencyGrid& freqs() const { return freqs_; }
    const std::vector<double>& wavenumbers() const { return k_; }
    const FftPlan& plan2() const { return *plan_; }
    const FftPlan& plan1() const { return *plan1_; }
    std::size_t lateral() const { return n_; }
    std::size_t depths() const { return nz_; }
    double dz() const { return dz_; }
    double dx() const { return dx_; }
    double domega() const { return freqs_.domega; }
    /// Reference velocity for depth-local weights (Q, Xi) at row j.
    double c_ref(std::size_t j) const { return c_ref_row_[j]; }

    /// psi on a k-domain bin: frequency window times both dip windows.
    double psi(double omega, std::size_t a, std::size_t b) const {
        return omega_window(omega, mute_) * dip_window(k_[a] / omega, mute_) * dip_window(k_[b] / omega, mute_);
    }

    std::vector<double> q_symbols(std::size_t j, double omega, int power) const {
        std::vector<double> q(n_);
        for (std::size_t a = 0; a < n_; ++a) q[a] = q_weight_symbol(c_ref_row_[j], omega, k_[a], power, tc_);
        return q;
    }

    /// Wavenumber multipliers (including 1/N per axis) and space multipliers
    /// (phase times edge damping) of the step from row j to row j - 1.
    void step_multipliers(std::size_t j, double omega, std::vector<cplx>& mk, std::vector<cplx>& px) const {
        mk.resize(n_);
        px.resize(n_);
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (std::size_t a = 0; a < n_; ++a) mk[a] = ssr_multiplier(c_ref_step_[j], omega, k_[a], dz_, tc_) * inv_n;
        for (std::size_t i = 0; i < n_; ++i)
            px[i] = SsrStepper::space_phase(c_mid_[j][i], c_ref_step_[j], omega, dz_) * edge_[i];
    }

    /// Unnormalized FFT2 input -> space field one row up.
    void step_up(std::size_t j, double omega, std::span<cplx> f) const {
        std::vector<cplx> mk, px;
        step_multipliers(j, omega, mk, px);
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t b = 0; b < n_; ++b) f[a * n_ + b] *= mk[a] * mk[b];
        plan_->backward(f);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t l = 0; l < n_; ++l) f[i * n_ + l] *= px[i] * px[l];
    }

    /// Space field at row j - 1 -> normalized k-domain field at row j.
    void step_down(std::size_t j, double omega, std::span<cplx> f) const {
        std::vector<cplx> mk, px;
        step_multipliers(j, omega, mk, px);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t l = 0; l < n_; ++l) f[i * n_ + l] *= std::conj(px[i] * px[l]);
        plan_->forward(f);
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t b = 0; b < n_; ++b) f[a * n_ + b] *= std::conj(mk[a] * mk[b]);
    }

    /// Upward continuation with per-depth sources, surface weights and psi.
    /// Returns the surface spectrum (before the time transform).
    SpectrumCube upward(const UpwardSource& src, const SurfaceWeight& w0) const {
        const std::size_t nw = freqs_.count;
        SpectrumCube out({geom_.s, geom_.r, freqs_.axis()});
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t iw = 0; iw < nw; ++iw) {
            const double omega = freqs_.omega(iw);
            std::vector<cplx> f(n_ * n_, cplx{});
            bool live = false;
            for (std::size_t j = nz_; j-- > 0;) {
                if (live) plan_->forward(f);
                src(j, iw, omega, f);
                live = true;
                if (j == 0) break;
                step_up(j, omega, f);
            }
            surface_scale(iw, omega, w0, f);
            plan_->backward(f);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t l = 0; l < n_; ++l) out(i, l, iw) = f[i * n_ + l];
        }
        return out;
    }

    /// Downward continuation of a surface spectrum, delivering every depth
    /// row (0 .. nz - 1) to the sink in order.
    void downward(const SpectrumCube& d, const SurfaceWeight& w0, const DepthSink& sink) const {
        if (!same_sampling(d.axis(0), geom_.s) || !same_sampling(d.axis(1), geom_.r) ||
            d.axis(2).n != freqs_.count)
            throw AxisError("spectrum does not match the engine geometry");
        const std::size_t nw = freqs_.count;
        std::vector<std::vector<cplx>> space(nw, std::vector<cplx>(n_ * n_));
        std::vector<std::vector<cplx>> kdom(nw, std::vector<cplx>(n_ * n_));
        for (std::size_t j = 0; j < nz_; ++j) {
#pragma omp parallel for schedule(dynamic, 1)
            for (std::size_t iw = 0; iw < nw; ++iw) {
                const double omega = freqs_.omega(iw);
                auto& f = space[iw];
                if (j == 0) {
                    for (std::size_t i = 0; i < n_; ++i)
                        for (std::size_t l = 0; l < n_; ++l) f[i * n_ + l] = d(i, l, iw);
                    plan_->forward(f);
                    surface_scale(iw, omega, w0, f);
                } else {
                    step_down(j, omega, f);
                }
                kdom[iw] = f;
                plan_->backward(f);
            }
            DepthFields df;
            df.index = j;
            df.z = static_cast<double>(j) * dz_;
            df.n = n_;
            df.freqs = &freqs_;
            df.space = space;
            df.kdom = kdom;
            sink(df);
        }
    }

    /// psi times the separable surface weight times 1/N^2, on an FFT2 field.
    void surface_scale(std::size_t iw, double omega, const SurfaceWeight& w0, std::span<cplx> f) const {
        const std::vector<double> v = w0(iw, omega);
        const double ww = omega_window(omega, mute_) / static_cast<double>(n_ * n_);
        std::vector<double> ws(n_);
        for (std::size_t a = 0; a < n_; ++a) ws[a] = dip_window(k_[a] / omega, mute_) * v[a];
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t b = 0; b < n_; ++b) f[a * n_ + b] *= ww * ws[a] * ws[b];
    }

    /// Sum over (a + b) mod n of x(a, b): the wavenumber of the diagonal.
    void antidiagonal_accumulate(std::span<const cplx> x, std::span<cplx> acc, double scale) const {
        for (std::size_t a = 0; a < n_; ++a) {
            const cplx* row = x.data() + a * n_;
            for (std::size_t b = 0; b < n_; ++b) {
                std::size_t m = a + b;
                if (m >= n_) m -= n_;
                acc[m] += scale * row[b];
            }
        }
    }

    /// Diagonal of the inverse FFT2 from accumulated antidiagonal sums.
    std::vector<double> diagonal_from_antidiagonal(std::vector<cplx> acc) const {
        plan1_->backward(acc);
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = acc[i].real();
        return out;
    }

private:
    Grid2D c0_;
    VelocityModel model_;
    AcquisitionGeometry geom_;
    TaperConfig tc_;
    MuteConfig mute_;
    FrequencyGrid freqs_;
    std::size_t n_ = 0, nz_ = 0;
    double dx_ = 0.0, dz_ = 0.0;
    std::vector<double> k_;
    std::vector<double> edge_;
    std::unique_ptr<FftPlan> plan_;
    std::unique_ptr<FftPlan> plan1_;
    std::vector<std::vector<double>> c_mid_;
    std::vector<double> c_ref_step_;
    std::vector<double> c_ref_row_;
};

/// Surface weight of plain continuation.
inline SurfaceWeight unit_weight(std::size_t n) {
    return [n](std::size_t, double) { return std::vector<double>(n, 1.0); };
}

/// One DSR step on a single-frequency field: forward continues z -> z - dz
/// (s-step then r-step), adjoint z -> z + dz. Velocities at the step midpoint,
/// row-minimum reference velocity.
inline SurveyField dsr_step(const SurveyField& field, double dz, const VelocityModel& m, const TaperConfig& tc,
                            Direction dir) {
    if (dz < 0.0) throw RangeError("depth step must be nonnegative");
    SurveyField out = field;
    if (dz == 0.0) return out;
    const std::size_t ns = field.s.n, nr = field.r.n;
    if (field.u.size() != ns * nr) throw AxisError("dsr_step: field size mismatch");
    const double z_new = dir == Direction::forward ? field.z - dz : field.z + dz;
    const double z_mid = 0.5 * (field.z + z_new);
    auto row = [&](const Axis& a) {
        std::vector<double> c(a.n);
        for (std::size_t i = 0; i < a.n; ++i) c[i] = m(a.coord(i), z_mid);
        return c;
    };
    const auto cs = row(field.s), cr = row(field.r);
    const double c_ref = std::min(*std::min_element(cs.begin(), cs.end()), *std::min_element(cr.begin(), cr.end()));
    SsrStepper ss(field.s, tc), sr(field.r, tc);
    std::vector<cplx> line;
    auto s_pass = [&] {
        line.resize(ns);
        for (std::size_t l = 0; l < nr; ++l) {
            for (std::size_t i = 0; i < ns; ++i) line[i] = out.u[i * nr + l];
            ss.step(line, field.omega, cs, c_ref, dz, dir);
            for (std::size_t i = 0; i < ns; ++i) out.u[i * nr + l] = line[i];
        }
    };
    auto r_pass = [&] {
        for (std::size_t i = 0; i < ns; ++i)
            sr.step(std::span<cplx>(out.u.data() + i * nr, nr), field.omega, cr, c_ref, dz, dir);
    };
    if (dir == Direction::forward) {
        s_pass();
        r_pass();
    } else {
        r_pass();
        s_pass();
    }
    out.z = z_new;
    return out;
}

/// Plain imaging condition at one depth: (dw / pi) sum_w Re U_w(x, x),
/// accumulated in ascending frequency.
inline std::vector<double> imaging_condition(const DepthFields& f) {
    std::vector<double> row(f.n, 0.0);
    for (std::size_t iw = 0; iw < f.count(); ++iw) {
        const auto& u = f.space[iw];
        for (std::size_t i = 0; i < f.n; ++i) row[i] += u[i * f.n + i].real();
    }
    const double scale = f.freqs->domega / M_PI;
    for (double& v : row) v *= scale;
    return row;
}

/// Downward continuation H(0, z)* psi of a data cube (no Q weights).
inline void downward_continue(const DataCube& data, const DsrEngine& eng, const DepthSink& sink) {
    DataCube d = data;
    apply_time_mute(d, eng.mute());
    const SpectrumCube spec = time_to_freq(d, eng.mute().band());
    eng.downward(spec, unit_weight(eng.lateral()), sink);
}

}  // namespace wemig
