#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "wemig/array.hpp"
#include "wemig/geometry.hpp"

namespace wemig {

enum class ModelKind { constant, gradient, lens };

struct PointScatterer {
    double x = 0.0, z = 0.0, amplitude = 1.0;
};

/// Horizontal band centered at z0. An optional carrier modulates the band
/// by cos(carrier (z - z0)) to place its spectrum at a chosen wavenumber.
struct ReflectorBand {
    double z0 = 0.0;
    double thickness = 0.0;
    double amplitude = 1.0;
    double carrier = 0.0;  // rad/m
    std::optional<double> x_min, x_max;
};

struct DippingSegment {
    double x_center = 0.0, z0 = 0.0, slope = 0.0, extent = 0.0, thickness = 0.0, amplitude = 1.0;
};

struct SceneSpec {
    ModelKind kind = ModelKind::constant;
    double velocity = 2000.0;   // constant c, or a of a + b z
    double gradient = 0.0;      // b
    double lens_x = 0.0, lens_z = 500.0, lens_radius = 200.0, lens_amplitude = -0.1;

    std::vector<PointScatterer> points;
    std::vector<ReflectorBand> bands;
    std::vector<DippingSegment> segments;

    std::size_t nx = 128, nz = 61;
    double dx = 20.0, dz = 20.0;
    double x0 = -1280.0;
    double clearance = 40.0;    // m; perturbations must vanish above
    std::size_t nt = 512;
    double dt = 0.004;
};

struct Scene {
    Grid2D model;
    Grid2D dc;
    AcquisitionGeometry geometry;
};

namespace detail {

/// 1 inside |d| <= half, cosine ramp to 0 over `ramp` beyond it.
inline double band_profile(double d, double half, double ramp) {
    const double e = std::abs(d) - half;
    if (e <= 0.0) return 1.0;
    if (e >= ramp) return 0.0;
    return 0.5 * (1.0 + std::cos(M_PI * e / ramp));
}

}  // namespace detail

inline double background_velocity(const SceneSpec& sp, double x, double z) {
    switch (sp.kind) {
        case ModelKind::constant: return sp.velocity;
        case ModelKind::gradient: return sp.velocity + sp.gradient * z;
        case ModelKind::lens: {
            const double r2 = ((x - sp.lens_x) * (x - sp.lens_x) + (z - sp.lens_z) * (z - sp.lens_z)) /
                              (sp.lens_radius * sp.lens_radius);
            return (sp.velocity + sp.gradient * z) * (1.0 + sp.lens_amplitude * std::exp(-r2));
        }
    }
    return sp.velocity;
}

inline Scene build_scene(const SceneSpec& sp) {
    if (sp.nx < 2 || sp.nz < 2) throw ContractError("scene grid needs at least 2 samples per axis");
    if (!(sp.clearance > 0.0)) throw ContractError("clearance depth must be positive");
    if (sp.kind == ModelKind::lens && !(sp.lens_amplitude > -1.0 && sp.lens_radius > 0.0))
        throw ContractError("lens must keep the velocity positive");
    const Axis az = make_axis(sp.nz, sp.dz, 0.0, "z");
    const Axis ax = make_axis(sp.nx, sp.dx, sp.x0, "x");
    Scene sc{Grid2D({az, ax}), Grid2D({az, ax}), {}};

    for (std::size_t j = 0; j < az.n; ++j)
        for (std::size_t i = 0; i < ax.n; ++i) {
            const double c = background_velocity(sp, ax.coord(i), az.coord(j));
            if (!(c > 0.0)) throw ContractError("scene velocity must stay positive");
            sc.model(j, i) = c;
        }

    const double ramp = 2.0 * sp.dz;
    for (const auto& b : sp.bands)
        for (std::size_t j = 0; j < az.n; ++j) {
            const double d = az.coord(j) - b.z0;
            double v = detail::band_profile(d, 0.5 * b.thickness, ramp);
            if (v == 0.0) continue;
            if (b.carrier != 0.0) v *= std::cos(b.carrier * d);
            for (std::size_t i = 0; i < ax.n; ++i) {
                double lat = 1.0;
                const double x = ax.coord(i);
                if (b.x_min && x < *b.x_min) lat = detail::band_profile(*b.x_min - x, 0.0, 2.0 * sp.dx);
                if (b.x_max && x > *b.x_max) lat = detail::band_profile(x - *b.x_max, 0.0, 2.0 * sp.dx);
                sc.dc(j, i) += b.amplitude * v * lat;
            }
        }

    for (const auto& s : sp.segments)
        for (std::size_t j = 0; j < az.n; ++j)
            for (std::size_t i = 0; i < ax.n; ++i) {
                const double x = ax.coord(i);
                const double along = detail::band_profile(x - s.x_center, 0.5 * s.extent, 2.0 * sp.dx);
                if (along == 0.0) continue;
                const double zc = s.z0 + s.slope * (x - s.x_center);
                const double across = detail::band_profile(az.coord(j) - zc, 0.5 * s.thickness, ramp);
                sc.dc(j, i) += s.amplitude * along * across;
            }

    for (const auto& p : sp.points) {
        const double fx = ax.index_of(p.x), fz = az.index_of(p.z);
        if (fx < 0.0 || fz < 0.0 || fx > static_cast<double>(ax.n - 1) || fz > static_cast<double>(az.n - 1))
            throw ContractError("point scatterer outside the model");
        const auto ix = static_cast<std::size_t>(std::min(std::floor(fx), static_cast<double>(ax.n - 2)));
        const auto iz = static_cast<std::size_t>(std::min(std::floor(fz), static_cast<double>(az.n - 2)));
        const double u = fx - static_cast<double>(ix), w = fz - static_cast<double>(iz);
        const double wts[4] = {(1 - u) * (1 - w), u * (1 - w), (1 - u) * w, u * w};
        const std::size_t zs[4] = {iz, iz, iz + 1, iz + 1}, xs[4] = {ix, ix + 1, ix, ix + 1};
        for (int k = 0; k < 4; ++k)
            if (wts[k] > 1e-12) sc.dc(zs[k], xs[k]) += p.amplitude * wts[k];
    }

    for (std::size_t j = 0; j < az.n; ++j) {
        if (az.coord(j) >= sp.clearance) break;
        for (std::size_t i = 0; i < ax.n; ++i)
            if (sc.dc(j, i) != 0.0) throw ContractError("perturbation violates the surface clearance depth");
    }
    sc.geometry = geometry_for_model(sc.model, sp.nt, sp.dt);
    return sc;
}

}  // namespace wemig
