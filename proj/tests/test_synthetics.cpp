#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "wemig/synthetics.hpp"

using namespace wemig;

TEST(Scene, PointOnAGridNodeIsASingleSpike) {
    SceneSpec sp;
    sp.points.push_back({0.0, 1000.0, 1.0});
    const Scene sc = build_scene(sp);
    std::size_t nonzero = 0;
    for (double v : sc.dc.values()) nonzero += v != 0.0;
    EXPECT_EQ(nonzero, 1u);
    const auto j = static_cast<std::size_t>(std::lround(sc.dc.axis(0).index_of(1000.0)));
    const auto i = static_cast<std::size_t>(std::lround(sc.dc.axis(1).index_of(0.0)));
    EXPECT_EQ(sc.dc(j, i), 1.0);
    for (double c : sc.model.values()) EXPECT_EQ(c, 2000.0);
}

TEST(Scene, OffGridPointSpreadsBilinearly) {
    SceneSpec sp;
    sp.points.push_back({5.0, 1010.0, 2.0});
    const Scene sc = build_scene(sp);
    double sum = 0.0;
    std::size_t nonzero = 0;
    for (double v : sc.dc.values()) {
        sum += v;
        nonzero += v != 0.0;
    }
    EXPECT_EQ(nonzero, 4u);
    EXPECT_NEAR(sum, 2.0, 1e-14);
}

TEST(Scene, GradientIsExact) {
    SceneSpec sp;
    sp.kind = ModelKind::gradient;
    sp.velocity = 1500.0;
    sp.gradient = 0.5;
    const Scene sc = build_scene(sp);
    for (std::size_t j = 0; j < sc.model.axis(0).n; ++j)
        for (std::size_t i = 0; i < sc.model.axis(1).n; ++i)
            EXPECT_EQ(sc.model(j, i), 1500.0 + 0.5 * sc.model.axis(0).coord(j));
}

TEST(Scene, LensMinimumAtItsCentre) {
    SceneSpec sp;
    sp.kind = ModelKind::lens;
    sp.lens_x = 0.0;
    sp.lens_z = 600.0;
    sp.lens_amplitude = -0.1;
    const Scene sc = build_scene(sp);
    std::size_t bj = 0, bi = 0;
    for (std::size_t j = 0; j < sc.model.axis(0).n; ++j)
        for (std::size_t i = 0; i < sc.model.axis(1).n; ++i)
            if (sc.model(j, i) < sc.model(bj, bi)) {
                bj = j;
                bi = i;
            }
    EXPECT_DOUBLE_EQ(sc.model(bj, bi), 0.9 * 2000.0);
    EXPECT_EQ(sc.model.axis(0).coord(bj), 600.0);
    EXPECT_EQ(sc.model.axis(1).coord(bi), 0.0);
}

TEST(Scene, BandIsTaperedOverTwoCells) {
    SceneSpec sp;
    ReflectorBand b;
    b.z0 = 600.0;
    b.thickness = 100.0;
    b.amplitude = 0.5;
    sp.bands.push_back(b);
    const Scene sc = build_scene(sp);
    const Axis& az = sc.dc.axis(0);
    for (std::size_t j = 0; j < az.n; ++j) {
        const double d = std::abs(az.coord(j) - 600.0);
        const double v = sc.dc(j, std::size_t{10});
        if (d <= 50.0) EXPECT_EQ(v, 0.5);
        else if (d >= 50.0 + 2.0 * sp.dz) EXPECT_EQ(v, 0.0);
        else {
            EXPECT_GT(v, 0.0);
            EXPECT_LT(v, 0.5);
        }
        // laterally uniform
        EXPECT_EQ(sc.dc(j, std::size_t{0}), sc.dc(j, std::size_t{100}));
    }
}

TEST(Scene, DippingSegmentFollowsItsSlope) {
    SceneSpec sp;
    DippingSegment s;
    s.x_center = 0.0;
    s.z0 = 600.0;
    s.slope = 0.25;
    s.extent = 800.0;
    s.thickness = 20.0;
    sp.segments.push_back(s);
    const Scene sc = build_scene(sp);
    for (double x : {-300.0, 0.0, 300.0}) {
        const auto i = static_cast<std::size_t>(std::lround(sc.dc.axis(1).index_of(x)));
        std::size_t jm = 0;
        for (std::size_t j = 0; j < sc.dc.axis(0).n; ++j)
            if (sc.dc(j, i) > sc.dc(jm, i)) jm = j;
        EXPECT_NEAR(sc.dc.axis(0).coord(jm), 600.0 + 0.25 * x, sp.dz);
    }
    const auto far = static_cast<std::size_t>(std::lround(sc.dc.axis(1).index_of(-1000.0)));
    for (std::size_t j = 0; j < sc.dc.axis(0).n; ++j) EXPECT_EQ(sc.dc(j, far), 0.0);
}

TEST(Scene, ClearanceAndBoundsAreEnforced) {
    SceneSpec sp;
    sp.points.push_back({0.0, 20.0, 1.0});
    EXPECT_THROW(build_scene(sp), ContractError);
    sp.points = {{0.0, 5000.0, 1.0}};
    EXPECT_THROW(build_scene(sp), ContractError);
    sp.points.clear();
    sp.clearance = 0.0;
    EXPECT_THROW(build_scene(sp), ContractError);
    sp.clearance = 40.0;
    sp.kind = ModelKind::lens;
    sp.lens_amplitude = -1.2;
    EXPECT_THROW(build_scene(sp), ContractError);
}

TEST(Scene, ReproducibleBitForBit) {
    SceneSpec sp;
    sp.kind = ModelKind::lens;
    sp.points.push_back({13.0, 777.0, 0.3});
    ReflectorBand b;
    b.z0 = 900.0;
    b.thickness = 60.0;
    b.carrier = 0.1;
    sp.bands.push_back(b);
    const Scene a = build_scene(sp), c = build_scene(sp);
    EXPECT_EQ(std::memcmp(a.model.values().data(), c.model.values().data(), a.model.size() * sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(a.dc.values().data(), c.dc.values().data(), a.dc.size() * sizeof(double)), 0);
}

TEST(Scene, GeometryFollowsTheModelGrid) {
    SceneSpec sp;
    const Scene sc = build_scene(sp);
    const auto& g = sc.geometry;
    EXPECT_TRUE(same_sampling(g.s, sc.model.axis(1)));
    EXPECT_TRUE(same_sampling(g.r, sc.model.axis(1)));
    EXPECT_EQ(g.t.n, sp.nt);
    EXPECT_EQ(g.t.delta, sp.dt);
    EXPECT_DOUBLE_EQ(g.z_max, sp.dz * static_cast<double>(sp.nz - 1));
    EXPECT_EQ(g.depth_count(), sp.nz);
}
