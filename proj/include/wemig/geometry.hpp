#pragma once

#include <cmath>

#include "wemig/array.hpp"

namespace wemig {

/// Surface acquisition sampled on the model's lateral grid. Sources and
/// receivers share the model x axis so the DSR diagonal s = r = x falls on
/// grid points.
struct AcquisitionGeometry {
    Axis s;
    Axis r;
    Axis t;
    double z_max = 0.0;
    double dz = 0.0;

    std::size_t depth_steps() const { return static_cast<std::size_t>(std::llround(z_max / dz)); }
    std::size_t depth_count() const { return depth_steps() + 1; }

    void validate() const {
        s.validate();
        r.validate();
        t.validate();
        if (!(z_max > 0.0)) throw AxisError("z_max must be positive");
        if (!(dz > 0.0)) throw AxisError("depth step must be positive");
        const double steps = z_max / dz;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            throw AxisError("depth step does not divide z_max");
        if (t.origin != 0.0) throw AxisError("time axis must start at 0");
    }
};

/// Geometry on the lateral grid of a (z, x) model, imaging down to the last
/// model row.
inline AcquisitionGeometry geometry_for_model(const Grid2D& model, std::size_t nt, double dt) {
    const Axis& ax = model.axis(1);
    const Axis& az = model.axis(0);
    if (std::abs(az.origin) > 1e-9 * az.delta) throw AxisError("model depth axis must start at z = 0");
    AcquisitionGeometry g;
    g.s = make_axis(ax.n, ax.delta, ax.origin, "s");
    g.r = make_axis(ax.n, ax.delta, ax.origin, "r");
    g.t = make_axis(nt, dt, 0.0, "t");
    g.dz = az.delta;
    g.z_max = az.delta * static_cast<double>(az.n - 1);
    g.validate();
    return g;
}

/// Throws unless the geometry and model share the lateral and depth grids.
inline void check_geometry(const AcquisitionGeometry& g, const Grid2D& model) {
    g.validate();
    const Axis& ax = model.axis(1);
    const Axis& az = model.axis(0);
    if (!same_sampling(g.s, ax) || !same_sampling(g.r, ax))
        throw AxisError("source and receiver axes must match the model x axis");
    if (std::abs(g.dz - az.delta) > 1e-9 * az.delta) throw AxisError("depth step must equal the model z step");
    if (std::abs(az.origin) > 1e-9 * az.delta) throw AxisError("model depth axis must start at z = 0");
    if (g.depth_count() > az.n) throw AxisError("z_max lies below the model");
}

}  // namespace wemig
