#pragma once

// Small scenes for unit tests: a few seconds per full operator application.

#include <random>

#include "wemig/synthetics.hpp"

namespace testing_support {

inline wemig::SceneSpec small_spec(wemig::ModelKind kind = wemig::ModelKind::constant) {
    wemig::SceneSpec sp;
    sp.kind = kind;
    sp.nx = 32;
    sp.nz = 16;
    sp.dx = 20.0;
    sp.dz = 20.0;
    sp.x0 = -320.0;
    sp.nt = 128;
    sp.lens_z = 160.0;
    sp.lens_radius = 100.0;
    return sp;
}

template <class A>
void fill_random(A& a, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (auto& v : a.storage()) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, wemig::cplx>) {
            v = {nd(rng), nd(rng)};
        } else {
            v = nd(rng);
        }
    }
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace testing_support
