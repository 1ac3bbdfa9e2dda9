#pragma once

#include <algorithm>
#include <cmath>

#include "wemig/array.hpp"

namespace wemig {

/// Bilinear view of a (z, x) velocity grid with the exact gradient of the
/// bilinear patch. Queries outside the grid are clamped to the border cell.
class VelocityModel {
public:
    explicit VelocityModel(const Grid2D& c0) : c0_(&c0) {
        if (c0.axis(0).n < 2 || c0.axis(1).n < 2)
            throw ContractError("velocity model needs at least 2 samples per axis");
        for (double v : c0.values())
            if (!(v > 0.0) || !std::isfinite(v)) throw ContractError("velocity must be positive and finite");
    }

    const Grid2D& grid() const { return *c0_; }
    const Axis& z_axis() const { return c0_->axis(0); }
    const Axis& x_axis() const { return c0_->axis(1); }

    bool inside(double x, double z) const {
        const double eps = 1e-9;
        return x >= x_axis().origin - eps * x_axis().delta && x <= x_axis().last() + eps * x_axis().delta &&
               z >= z_axis().origin - eps * z_axis().delta && z <= z_axis().last() + eps * z_axis().delta;
    }

    struct Sample {
        double c, cx, cz;
    };

    /// Lower-left corner of the bilinear cell holding (x, z), clamped to the grid.
    struct Patch {
        std::size_t ix = 0, iz = 0;
        friend bool operator==(const Patch&, const Patch&) = default;
    };

    Patch patch_at(double x, double z) const {
        const Axis& ax = x_axis();
        const Axis& az = z_axis();
        return {static_cast<std::size_t>(std::clamp(std::floor(ax.index_of(x)), 0.0, static_cast<double>(ax.n - 2))),
                static_cast<std::size_t>(std::clamp(std::floor(az.index_of(z)), 0.0, static_cast<double>(az.n - 2)))};
    }

    /// The bilinear polynomial of cell p, extended beyond the cell.
    Sample sample(const Patch& p, double x, double z) const {
        const Axis& ax = x_axis();
        const Axis& az = z_axis();
        const double u = ax.index_of(x) - static_cast<double>(p.ix);
        const double w = az.index_of(z) - static_cast<double>(p.iz);
        const double c00 = (*c0_)(p.iz, p.ix), c01 = (*c0_)(p.iz, p.ix + 1);
        const double c10 = (*c0_)(p.iz + 1, p.ix), c11 = (*c0_)(p.iz + 1, p.ix + 1);
        Sample s;
        s.c = (1 - w) * ((1 - u) * c00 + u * c01) + w * ((1 - u) * c10 + u * c11);
        s.cx = ((1 - w) * (c01 - c00) + w * (c11 - c10)) / ax.delta;
        s.cz = ((1 - u) * (c10 - c00) + u * (c11 - c01)) / az.delta;
        return s;
    }

    Sample sample(double x, double z) const { return sample(patch_at(x, z), x, z); }

    double operator()(double x, double z) const { return sample(x, z).c; }

    double max_velocity() const { return *std::max_element(c0_->values().begin(), c0_->values().end()); }
    double min_velocity() const { return *std::min_element(c0_->values().begin(), c0_->values().end()); }

    double row_min(std::size_t iz) const {
        double m = (*c0_)(iz, 0);
        for (std::size_t ix = 1; ix < x_axis().n; ++ix) m = std::min(m, (*c0_)(iz, ix));
        return m;
    }

private:
    const Grid2D* c0_;
};

}  // namespace wemig
