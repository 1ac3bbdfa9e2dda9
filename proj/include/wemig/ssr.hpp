#pragma once

// One-way depth extrapolation by split-step Fourier steps.
//
// Modeling continues upward (z decreases). One forward step from z to z - dz:
//
//   u <- T . P . IFFT . M . FFT u
//   M(k) = exp(-i b(c_ref, w, k) dz)           wavenumber-domain phase shift
//   P(x) = exp(-i w (1/c0(x) - 1/c_ref) dz)    space-domain correction
//   T(x)                                       real edge damping
//
// A delay of dz/c at k = 0 is exp(-i w dz/c) under the exp(+i w t) inverse
// kernel, hence the minus sign. The adjoint step applies the conjugates in
// reverse order.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "wemig/array.hpp"
#include "wemig/fft.hpp"
#include "wemig/taper.hpp"
#include "wemig/velocity.hpp"

namespace wemig {

enum class EvanescentPolicy { damp, zero };
enum class Direction { forward, adjoint };

struct TaperConfig {
    double q_lo = 0.90;
    double q_hi = 1.10;
    double phi_max = 0.1;
    EvanescentPolicy policy = EvanescentPolicy::zero;
    /// Lateral absorbing strip applied every step: width in cells and the
    /// exponent scale at the outermost cell.
    std::size_t edge_width = 10;
    double edge_decay = 0.35;

    void validate() const {
        if (!(q_lo > 0.0 && q_lo < 1.0 && q_hi > 1.0)) throw ConfigError("taper: need 0 < q_lo < 1 < q_hi");
        if (!(phi_max > 0.0)) throw ConfigError("taper: phi_max must be positive");
        if (!(edge_decay >= 0.0)) throw ConfigError("taper: edge_decay must be nonnegative");
    }
};

/// Raised-cosine bump of height phi_max on (q_lo, q_hi).
inline double phi_bump(double q, const TaperConfig& tc) {
    if (q <= tc.q_lo || q >= tc.q_hi) return 0.0;
    const double u = (q - tc.q_lo) / (tc.q_hi - tc.q_lo);
    return tc.phi_max * 0.5 * (1.0 - std::cos(2.0 * M_PI * u));
}

/// Regularized vertical wavenumber b. Propagating (q <= q_lo): the exact
/// sgn(w) sqrt(w^2/c^2 - k^2). Inside the band: principal root of
/// w^2/c^2 - k^2 - i w^2 phi/c^2, whose negative imaginary part damps under
/// exp(-i b dz). Beyond q_hi: -i |w| phi_max / c. Negative w uses
/// b(-w) = -conj(b(w)) so that the step is Hermitian in w.
inline cplx vertical_slowness_symbol(double c, double omega, double k, const TaperConfig& tc) {
    if (omega == 0.0) throw DomainError("vertical slowness undefined at omega = 0");
    const double w = std::abs(omega);
    const double q = std::abs(k) * c / w;
    cplx b;
    if (q <= tc.q_lo) {
        b = std::sqrt(w * w / (c * c) - k * k);
    } else if (q < tc.q_hi) {
        const double re = w * w / (c * c) - k * k;
        b = std::sqrt(cplx(re, -w * w * phi_bump(q, tc) / (c * c)));
        if (b.imag() > 0.0) b = -b;  // cut along the negative real axis
        if (b.imag() == 0.0 && re < 0.0) b = cplx(0.0, -std::sqrt(-re));
    } else {
        b = cplx(0.0, -w * tc.phi_max / c);
    }
    return omega > 0.0 ? b : -std::conj(b);
}

/// Wavenumber-domain multiplier of one forward step.
inline cplx ssr_multiplier(double c_ref, double omega, double k, double dz, const TaperConfig& tc) {
    const double q = std::abs(k) * c_ref / std::abs(omega);
    if (tc.policy == EvanescentPolicy::zero && q >= tc.q_hi) return 0.0;
    return std::exp(cplx(0.0, -1.0) * vertical_slowness_symbol(c_ref, omega, k, tc) * dz);
}

/// Principal symbol of Q^power: [|w|^-1/2 |1/c^2 - k^2/w^2 - i phi/c^2|^-1/4]^power,
/// with q clamped to q_hi so the weight stays bounded past the evanescent edge.
inline double q_weight_symbol(double c_ref, double omega, double k, int power, const TaperConfig& tc) {
    if (power != 1 && power != -1) throw RangeError("Q power must be +1 or -1");
    const double w = std::abs(omega);
    const double q = std::min(std::abs(k) * c_ref / w, tc.q_hi);
    const double inv_c2 = 1.0 / (c_ref * c_ref);
    const double a = std::abs(cplx(inv_c2 * (1.0 - q * q), -phi_bump(q, tc) * inv_c2));
    const double sym = 1.0 / (std::sqrt(w) * std::pow(a, 0.25));
    return power > 0 ? sym : 1.0 / sym;
}

/// One-leg term of Xi: c^-2 |c^-2 - k^2/w^2 - i phi/c^2|^-1/2, regularized like Q.
inline double xi_leg_symbol(double c_ref, double omega, double k, const TaperConfig& tc) {
    const double q = std::min(std::abs(k) * c_ref / std::abs(omega), tc.q_hi);
    const double inv_c2 = 1.0 / (c_ref * c_ref);
    const double a = std::abs(cplx(inv_c2 * (1.0 - q * q), -phi_bump(q, tc) * inv_c2));
    return inv_c2 / std::sqrt(a);
}

/// Real lateral damping profile, 1 in the interior.
inline std::vector<double> edge_profile(std::size_t n, const TaperConfig& tc) {
    std::vector<double> w(n, 1.0);
    const std::size_t width = std::min(tc.edge_width, n / 2);
    for (std::size_t i = 0; i < width; ++i) {
        const double u = tc.edge_decay * static_cast<double>(width - i) / static_cast<double>(width);
        w[i] = w[n - 1 - i] = std::exp(-u * u);
    }
    return w;
}

/// Single-frequency field on the lateral axis at depth z.
struct FreqSlice {
    double omega = 0.0;
    double z = 0.0;
    Axis x;
    std::vector<cplx> u;
};

/// Minimum of c0 along the lateral axis at depth z (bilinear in z).
inline double reference_velocity(const VelocityModel& m, double z) {
    const Axis& ax = m.x_axis();
    double c = m(ax.origin, z);
    for (std::size_t i = 1; i < ax.n; ++i) c = std::min(c, m(ax.coord(i), z));
    return c;
}

/// Reusable split-step kernel for one lateral axis.
class SsrStepper {
public:
    SsrStepper(const Axis& x, const TaperConfig& tc)
        : x_(x), tc_(tc), plan_(x.n), k_(dft_wavenumbers(x.n, x.delta)), edge_(edge_profile(x.n, tc)) {
        tc.validate();
    }

    const std::vector<double>& wavenumbers() const { return k_; }
    const std::vector<double>& edge() const { return edge_; }

    /// One step of size dz with velocities c_row (per x sample) and c_ref.
    void step(std::span<cplx> u, double omega, std::span<const double> c_row, double c_ref, double dz,
              Direction dir) const {
        if (!(c_ref > 0.0)) throw ConfigError("reference velocity must be positive");
        if (u.size() != x_.n || c_row.size() != x_.n) throw AxisError("ssr_step: field size mismatch");
        if (dz == 0.0) return;
        const std::size_t n = x_.n;
        const double inv_n = 1.0 / static_cast<double>(n);
        if (dir == Direction::forward) {
            plan_.forward(u);
            for (std::size_t j = 0; j < n; ++j) u[j] *= ssr_multiplier(c_ref, omega, k_[j], dz, tc_) * inv_n;
            plan_.backward(u);
            for (std::size_t i = 0; i < n; ++i) u[i] *= space_phase(c_row[i], c_ref, omega, dz) * edge_[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) u[i] *= std::conj(space_phase(c_row[i], c_ref, omega, dz)) * edge_[i];
            plan_.forward(u);
            for (std::size_t j = 0; j < n; ++j)
                u[j] *= std::conj(ssr_multiplier(c_ref, omega, k_[j], dz, tc_)) * inv_n;
            plan_.backward(u);
        }
    }

    static cplx space_phase(double c, double c_ref, double omega, double dz) {
        return std::polar(1.0, -omega * (1.0 / c - 1.0 / c_ref) * dz);
    }

private:
    Axis x_;
    TaperConfig tc_;
    FftPlan plan_;
    std::vector<double> k_;
    std::vector<double> edge_;
};

/// Velocities at depth z along the lateral axis.
inline std::vector<double> velocity_row(const VelocityModel& m, double z) {
    const Axis& ax = m.x_axis();
    std::vector<double> c(ax.n);
    for (std::size_t i = 0; i < ax.n; ++i) c[i] = m(ax.coord(i), z);
    return c;
}

/// One step: forward continues z -> z - dz, adjoint z -> z + dz. Velocities
/// are taken at the step midpoint. c_ref <= 0 means "row minimum".
inline FreqSlice ssr_step(const FreqSlice& slice, double dz, const VelocityModel& m, double c_ref,
                          const TaperConfig& tc, Direction dir) {
    if (dz < 0.0) throw RangeError("depth step must be nonnegative");
    FreqSlice out = slice;
    const double z_new = dir == Direction::forward ? slice.z - dz : slice.z + dz;
    const double z_mid = 0.5 * (slice.z + z_new);
    if (dz == 0.0) return out;
    const auto c_row = velocity_row(m, z_mid);
    if (c_ref == 0.0) c_ref = *std::min_element(c_row.begin(), c_row.end());
    if (!(c_ref > 0.0)) throw ConfigError("reference velocity must be positive");
    SsrStepper(slice.x, tc).step(out.u, slice.omega, c_row, c_ref, dz, dir);
    out.z = z_new;
    return out;
}

/// Multiply the wavenumber-domain field by the Q^power symbol at depth z,
/// using the row-minimum reference velocity.
inline FreqSlice q_weight(const FreqSlice& slice, const VelocityModel& m, double z, int power,
                          const TaperConfig& tc) {
    FreqSlice out = slice;
    const double c_ref = reference_velocity(m, z);
    const std::size_t n = slice.x.n;
    FftPlan plan(n);
    plan.forward(out.u);
    for (std::size_t j = 0; j < n; ++j)
        out.u[j] *= q_weight_symbol(c_ref, slice.omega, dft_wavenumber(j, n, slice.x.delta), power, tc) /
                    static_cast<double>(n);
    plan.backward(out.u);
    return out;
}

/// Composition of steps of the model depth step between z_from and z_to.
/// Forward requires z_to < z_from; adjoint runs downward (z_to > z_from).
inline FreqSlice propagate_ssr(const FreqSlice& slice, double z_from, double z_to, const VelocityModel& m,
                               const TaperConfig& tc, Direction dir) {
    const double dz = m.z_axis().delta;
    const double span = dir == Direction::forward ? z_from - z_to : z_to - z_from;
    if (span < 0.0) throw AxisError("propagation direction does not match the depth interval");
    const double steps = span / dz;
    const auto nsteps = static_cast<std::size_t>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(nsteps)) > 1e-9 * std::max(1.0, steps))
        throw AxisError("depth interval is not a whole number of steps");
    FreqSlice cur = slice;
    cur.z = z_from;
    SsrStepper stepper(slice.x, tc);
    for (std::size_t i = 0; i < nsteps; ++i) {
        const double z_new = dir == Direction::forward ? cur.z - dz : cur.z + dz;
        const double z_mid = 0.5 * (cur.z + z_new);
        const auto c_row = velocity_row(m, z_mid);
        const double c_ref = *std::min_element(c_row.begin(), c_row.end());
        stepper.step(cur.u, cur.omega, c_row, c_ref, dz, dir);
        cur.z = z_new;
    }
    cur.z = z_to;
    return cur;
}

}  // namespace wemig
