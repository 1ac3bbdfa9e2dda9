#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wemig/error.hpp"

namespace wemig {

using cplx = std::complex<double>;

/// Regular sampling of one coordinate.
struct Axis {
    std::size_t n = 1;
    double delta = 1.0;
    double origin = 0.0;
    std::string label = "x";

    double coord(std::size_t i) const { return origin + delta * static_cast<double>(i); }
    double last() const { return coord(n - 1); }

    /// Fractional index of coordinate v.
    double index_of(double v) const { return (v - origin) / delta; }

    void validate() const {
        if (n < 1) throw ContractError("axis '" + label + "': n must be >= 1");
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw ContractError("axis '" + label + "': delta must be positive");
        if (!std::isfinite(origin)) throw ContractError("axis '" + label + "': origin not finite");
        if (label.empty()) throw ContractError("axis label must be nonempty");
        if (label.size() > 8) throw ContractError("axis label '" + label + "' longer than 8 bytes");
    }

    friend bool operator==(const Axis& a, const Axis& b) {
        return a.n == b.n && a.delta == b.delta && a.origin == b.origin && a.label == b.label;
    }
};

/// Same sampling, labels ignored.
inline bool same_sampling(const Axis& a, const Axis& b, double rel = 1e-12) {
    return a.n == b.n && std::abs(a.delta - b.delta) <= rel * std::abs(a.delta) &&
           std::abs(a.origin - b.origin) <= rel * std::max(std::abs(a.delta), std::abs(a.origin));
}

template <class T>
inline bool is_finite_sample(const T& v) {
    if constexpr (std::is_same_v<T, cplx>) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    } else {
        return std::isfinite(v);
    }
}

/// Dense row-major N-dimensional array with axis metadata; the last axis
/// varies fastest.
template <class T, std::size_t N>
class NdArray {
public:
    using value_type = T;
    static constexpr std::size_t rank = N;

    NdArray() = default;

    explicit NdArray(std::array<Axis, N> axes) : axes_(std::move(axes)) {
        for (const auto& a : axes_) a.validate();
        values_.assign(count(), T{});
    }

    NdArray(std::array<Axis, N> axes, std::vector<T> values)
        : axes_(std::move(axes)), values_(std::move(values)) {
        for (const auto& a : axes_) a.validate();
        if (values_.size() != count())
            throw LengthError("value count " + std::to_string(values_.size()) +
                              " does not match axes product " + std::to_string(count()));
    }

    const std::array<Axis, N>& axes() const { return axes_; }
    const Axis& axis(std::size_t d) const { return axes_[d]; }
    std::size_t size() const { return values_.size(); }

    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    std::vector<T>& storage() { return values_; }
    const std::vector<T>& storage() const { return values_; }

    std::size_t count() const {
        std::size_t c = 1;
        for (const auto& a : axes_) c *= a.n;
        return c;
    }

    template <class... I>
    std::size_t offset(I... idx) const {
        static_assert(sizeof...(I) == N);
        const std::array<std::size_t, N> ix{static_cast<std::size_t>(idx)...};
        std::size_t off = 0;
        for (std::size_t d = 0; d < N; ++d) off = off * axes_[d].n + ix[d];
        return off;
    }

    template <class... I>
    T& operator()(I... idx) {
        return values_[offset(idx...)];
    }
    template <class... I>
    const T& operator()(I... idx) const {
        return values_[offset(idx...)];
    }

    bool all_finite() const {
        for (const auto& v : values_)
            if (!is_finite_sample(v)) return false;
        return true;
    }

    void fill(const T& v) { std::fill(values_.begin(), values_.end(), v); }

private:
    std::array<Axis, N> axes_{};
    std::vector<T> values_;
};

/// Real field on (z, x): c0, dc, images.
using Grid2D = NdArray<double, 2>;
using ComplexGrid2D = NdArray<cplx, 2>;
/// Reflection data d(s, r, t).
using DataCube = NdArray<double, 3>;
/// Retained positive-frequency spectrum D(s, r, omega).
using SpectrumCube = NdArray<cplx, 3>;

template <class T, std::size_t N>
double norm2(const NdArray<T, N>& a) {
    double s = 0.0;
    for (const auto& v : a.values()) s += std::norm(v);
    return std::sqrt(s);
}

/// Euclidean inner product (real part for complex arrays).
template <class T, std::size_t N>
double dot(const NdArray<T, N>& a, const NdArray<T, N>& b) {
    if (a.size() != b.size()) throw AxisError("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if constexpr (std::is_same_v<T, cplx>) {
            s += (a.values()[i] * std::conj(b.values()[i])).real();
        } else {
            s += a.values()[i] * b.values()[i];
        }
    }
    return s;
}

inline Axis make_axis(std::size_t n, double delta, double origin, std::string label) {
    Axis a{n, delta, origin, std::move(label)};
    a.validate();
    return a;
}

}  // namespace wemig
