#pragma once

// Dot-product tests <A x, y> = <x, A* y> for every operator pair, on
// seeded random inputs. Relative residual |lhs - rhs| / max(|lhs|, |rhs|).

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wemig/annihilator.hpp"

namespace wemig {

struct DotResult {
    std::string name;
    cplx lhs;
    cplx rhs;
    double rel = 0.0;
};

namespace detail {

inline double dot_rel(cplx a, cplx b) {
    const double m = std::max(std::abs(a), std::abs(b));
    return m > 0.0 ? std::abs(a - b) / m : 0.0;
}

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Uniform on [-1, 1) from a counter, so large random fields need no storage.
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    const std::uint64_t h = splitmix(splitmix(splitmix(seed ^ a) ^ b) ^ c);
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

inline std::vector<cplx> random_complex(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<cplx> v(n);
    for (auto& x : v) x = {nd(rng), nd(rng)};
    return v;
}

inline cplx cdot(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s;
}

inline double rdot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <class T, std::size_t N>
void fill_normal(NdArray<T, N>& a, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    for (auto& v : a.storage()) v = nd(rng);
}

}  // namespace detail

inline DotResult dot_ssr_step(const DsrEngine& eng, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto& m = eng.velocity();
    const double z = eng.dz() * static_cast<double>(eng.depths() / 2 + 1), omega = eng.freqs().omega(eng.freqs().count / 2);
    FreqSlice u{omega, z, m.x_axis(), detail::random_complex(m.x_axis().n, rng)};
    FreqSlice v{omega, z - eng.dz(), m.x_axis(), detail::random_complex(m.x_axis().n, rng)};
    const auto fu = ssr_step(u, eng.dz(), m, 0.0, eng.taper(), Direction::forward);
    const auto av = ssr_step(v, eng.dz(), m, 0.0, eng.taper(), Direction::adjoint);
    DotResult r{"ssr_step", detail::cdot(fu.u, v.u), detail::cdot(u.u, av.u)};
    r.rel = detail::dot_rel(r.lhs, r.rhs);
    return r;
}

inline DotResult dot_propagate_ssr(const DsrEngine& eng, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 1);
    const auto& m = eng.velocity();
    const double z = eng.geometry().z_max, omega = eng.freqs().omega(eng.freqs().count / 3);
    FreqSlice u{omega, z, m.x_axis(), detail::random_complex(m.x_axis().n, rng)};
    FreqSlice v{omega, 0.0, m.x_axis(), detail::random_complex(m.x_axis().n, rng)};
    const auto fu = propagate_ssr(u, z, 0.0, m, eng.taper(), Direction::forward);
    const auto av = propagate_ssr(v, 0.0, z, m, eng.taper(), Direction::adjoint);
    DotResult r{"propagate_ssr", detail::cdot(fu.u, v.u), detail::cdot(u.u, av.u)};
    r.rel = detail::dot_rel(r.lhs, r.rhs);
    return r;
}

inline DotResult dot_dsr_step(const DsrEngine& eng, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 2);
    const auto& g = eng.geometry();
    const std::size_t n = eng.lateral();
    const double z = eng.dz() * static_cast<double>(eng.depths() / 2 + 1), omega = eng.freqs().omega(eng.freqs().count / 2);
    SurveyField u{omega, z, g.s, g.r, detail::random_complex(n * n, rng)};
    SurveyField v{omega, z - eng.dz(), g.s, g.r, detail::random_complex(n * n, rng)};
    const auto fu = dsr_step(u, eng.dz(), eng.velocity(), eng.taper(), Direction::forward);
    const auto av = dsr_step(v, eng.dz(), eng.velocity(), eng.taper(), Direction::adjoint);
    DotResult r{"dsr_step", detail::cdot(fu.u, v.u), detail::cdot(u.u, av.u)};
    r.rel = detail::dot_rel(r.lhs, r.rhs);
    return r;
}

/// Per-frequency continuation H with sources at every depth against the
/// engine's downward continuation, both with psi at the surface.
inline DotResult dot_continuation(const DsrEngine& eng, std::uint64_t seed) {
    const std::size_t n = eng.lateral(), nn = n * n;
    auto field = [&](std::size_t iw, std::size_t j, std::size_t k) {
        return cplx{detail::counter_uniform(seed, iw, j, 2 * k), detail::counter_uniform(seed, iw, j, 2 * k + 1)};
    };
    auto src = [&](std::size_t j, std::size_t iw, double, std::span<cplx> khat) {
        std::vector<cplx> f(nn);
        for (std::size_t k = 0; k < nn; ++k) f[k] = field(iw, j, k);
        eng.plan2().forward(f);
        for (std::size_t k = 0; k < nn; ++k) khat[k] += f[k];
    };
    const SpectrumCube up = eng.upward(src, unit_weight(n));
    std::mt19937_64 rng(seed + 3);
    SpectrumCube d(up.axes());
    std::normal_distribution<double> nd;
    for (auto& v : d.storage()) v = {nd(rng), nd(rng)};
    cplx rhs{};
    eng.downward(d, unit_weight(n), [&](const DepthFields& f) {
        for (std::size_t iw = 0; iw < f.count(); ++iw)
            for (std::size_t k = 0; k < nn; ++k) rhs += field(iw, f.index, k) * std::conj(f.space[iw][k]);
    });
    DotResult r{"continuation_H", detail::cdot(up.values(), d.values()), rhs};
    r.rel = detail::dot_rel(r.lhs, r.rhs);
    return r;
}

inline DotResult dot_k(const DsrEngine& eng, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 4);
    const auto& g = eng.geometry();
    DataCube x({g.s, g.r, g.t});
    detail::fill_normal(x, rng);
    SunkField u = detail::sunk_field_for(eng);
    detail::fill_normal(u, rng);
    const double a = detail::rdot(k_star(eng, x).values(), u.values()) * g.s.delta * g.r.delta * g.dz;
    const double b = detail::rdot(x.values(), k_forward(eng, u).values()) * g.s.delta * g.r.delta * g.t.delta;
    DotResult r{"K/K*", a, b};
    r.rel = detail::dot_rel(a, b);
    return r;
}

inline DotResult dot_born(const DsrEngine& eng, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 5);
    const auto& g = eng.geometry();
    Grid2D dc(eng.model().axes());
    detail::fill_normal(dc, rng);
    for (std::size_t i = 0; i < dc.axis(1).n; ++i) dc(std::size_t{0}, i) = 0.0;
    DataCube d({g.s, g.r, g.t});
    detail::fill_normal(d, rng);
    const auto& az = dc.axis(0);
    const double a = detail::rdot(born_model(eng, dc).values(), d.values()) * g.s.delta * g.r.delta * g.t.delta;
    const double b = detail::rdot(dc.values(), migrate_adjoint(eng, d).values()) * dc.axis(1).delta * az.delta;
    DotResult r{"born/migrate", a, b};
    r.rel = detail::dot_rel(a, b);
    return r;
}

inline std::vector<DotResult> dot_test_suite(const DsrEngine& eng, std::uint64_t seed) {
    return {dot_ssr_step(eng, seed), dot_propagate_ssr(eng, seed), dot_dsr_step(eng, seed),
            dot_continuation(eng, seed), dot_k(eng, seed), dot_born(eng, seed)};
}

}  // namespace wemig
