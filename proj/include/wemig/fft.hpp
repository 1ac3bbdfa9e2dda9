#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>

#include "wemig/array.hpp"

namespace wemig {

namespace detail {
// The FFTW planner is not thread-safe; execution with new arrays is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace detail

/// Unnormalized in-place complex DFT plan of a 1D or 2D row-major array.
/// Forward uses e^{-i k x}; the inverse is unnormalized.
class FftPlan {
public:
    FftPlan() = default;

    /// 1D transform of length n.
    explicit FftPlan(std::size_t n) : FftPlan(1, n) {}

    /// 2D transform of an n0 x n1 row-major array (n0 == 1 gives 1D).
    FftPlan(std::size_t n0, std::size_t n1) : n0_(n0), n1_(n1) {
        std::vector<cplx> scratch(n0 * n1);
        std::lock_guard lock(detail::fftw_planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        auto* p = detail::as_fftw(scratch.data());
        if (n0 == 1) {
            fwd_ = fftw_plan_dft_1d(static_cast<int>(n1), p, p, FFTW_FORWARD, flags);
            inv_ = fftw_plan_dft_1d(static_cast<int>(n1), p, p, FFTW_BACKWARD, flags);
        } else {
            fwd_ = fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), p, p, FFTW_FORWARD, flags);
            inv_ = fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), p, p, FFTW_BACKWARD, flags);
        }
    }

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&& o) noexcept { swap(o); }
    FftPlan& operator=(FftPlan&& o) noexcept {
        swap(o);
        return *this;
    }
    ~FftPlan() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (inv_) fftw_destroy_plan(inv_);
    }

    std::size_t size() const { return n0_ * n1_; }

    void forward(std::span<cplx> a) const {
        check(a);
        fftw_execute_dft(fwd_, detail::as_fftw(a.data()), detail::as_fftw(a.data()));
    }
    /// Unnormalized inverse (multiply by 1/size() for the true inverse).
    void backward(std::span<cplx> a) const {
        check(a);
        fftw_execute_dft(inv_, detail::as_fftw(a.data()), detail::as_fftw(a.data()));
    }

private:
    void check(std::span<cplx> a) const {
        if (a.size() != size()) throw AxisError("fft: array size does not match plan");
    }
    void swap(FftPlan& o) noexcept {
        std::swap(n0_, o.n0_);
        std::swap(n1_, o.n1_);
        std::swap(fwd_, o.fwd_);
        std::swap(inv_, o.inv_);
    }

    std::size_t n0_ = 0, n1_ = 0;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

/// Angular wavenumber of DFT bin j for n samples of spacing d (signed,
/// negative frequencies in the upper half).
inline double dft_wavenumber(std::size_t j, std::size_t n, double d) {
    const double dk = 2.0 * M_PI / (static_cast<double>(n) * d);
    const auto jj = static_cast<long long>(j);
    const auto nn = static_cast<long long>(n);
    return dk * static_cast<double>(jj <= (nn - 1) / 2 ? jj : jj - nn);
}

inline std::vector<double> dft_wavenumbers(std::size_t n, double d) {
    std::vector<double> k(n);
    for (std::size_t j = 0; j < n; ++j) k[j] = dft_wavenumber(j, n, d);
    return k;
}

}  // namespace wemig
