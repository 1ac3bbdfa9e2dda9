#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wemig/dottest.hpp"

using namespace wemig;
using testing_support::small_spec;

namespace {

Scene point_scene(ModelKind kind = ModelKind::constant) {
    SceneSpec sp = small_spec(kind);
    sp.points.push_back({0.0, 200.0, 1.0});
    return build_scene(sp);
}

double sq_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

TEST(KOperators, AdjointPair) {
    for (auto kind : {ModelKind::constant, ModelKind::lens}) {
        const Scene sc = build_scene(small_spec(kind));
        const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
        EXPECT_LT(dot_k(eng, 17).rel, 1e-12);
    }
}

TEST(KTildeStar, ZeroDataGivesZeroField) {
    const Scene sc = build_scene(small_spec());
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    const SunkField u = ktilde_star(eng, DataCube({sc.geometry.s, sc.geometry.r, sc.geometry.t}));
    for (double v : u.values()) EXPECT_EQ(v, 0.0);
    const DataCube w = annihilate(eng, DataCube({sc.geometry.s, sc.geometry.r, sc.geometry.t}));
    for (double v : w.values()) EXPECT_EQ(v, 0.0);
}

TEST(KTildeStar, DiagonalIsTheReconstruction) {
    const Scene sc = point_scene(ModelKind::lens);
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    const DataCube d = born_model(eng, sc.dc);
    const SunkField u = ktilde_star(eng, d);
    const Grid2D rec = reconstruct(eng, d);
    const double scale = testing_support::max_abs(rec.values());
    ASSERT_GT(scale, 0.0);
    for (std::size_t j = 0; j < rec.axis(0).n; ++j)
        for (std::size_t i = 0; i < rec.axis(1).n; ++i) EXPECT_NEAR(u(j, i, i), rec(j, i), 1e-10 * scale);
}

TEST(KTildeStar, PointFocusesOnTheDiagonal) {
    const Scene sc = point_scene();
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    const SunkField u = ktilde_star(eng, born_model(eng, sc.dc));
    const std::size_t n = eng.lateral();
    double near = 0.0, all = 0.0;
    for (std::size_t j = 8; j <= 12; ++j)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const double e = u(j, a, b) * u(j, a, b);
                all += e;
                if (std::abs(static_cast<long long>(a) - static_cast<long long>(b)) < 2) near += e;
            }
    ASSERT_GT(all, 0.0);
    EXPECT_GT(near / all, 0.5);
}

TEST(OffsetMult, DiagonalVanishesAndSignFlips) {
    const Scene sc = build_scene(small_spec());
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    SunkField u = detail::sunk_field_for(eng);
    testing_support::fill_random(u, 4);
    const std::size_t n = eng.lateral();
    // symmetrize in (s, r)
    for (std::size_t j = 0; j < u.axis(0).n; ++j)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < a; ++b) u(j, b, a) = u(j, a, b);
    const SunkField m = apply_offset_mult(u);
    for (std::size_t j = 0; j < u.axis(0).n; ++j)
        for (std::size_t a = 0; a < n; ++a) {
            EXPECT_EQ(m(j, a, a), 0.0);
            for (std::size_t b = 0; b < n; ++b) EXPECT_EQ(m(j, a, b), -m(j, b, a));
        }
}

TEST(OffsetMult, DoublesWithOffsets) {
    const Axis az = make_axis(2, 10.0, 0.0, "z");
    SunkField a({az, make_axis(5, 10.0, -20.0, "s"), make_axis(5, 10.0, -20.0, "r")});
    SunkField b({az, make_axis(5, 20.0, -40.0, "s"), make_axis(5, 20.0, -40.0, "r")});
    testing_support::fill_random(a, 8);
    b.storage() = a.storage();
    const SunkField ma = apply_offset_mult(a), mb = apply_offset_mult(b);
    for (std::size_t k = 0; k < ma.size(); ++k) EXPECT_DOUBLE_EQ(mb.storage()[k], 2.0 * ma.storage()[k]);
}

TEST(Annihilate, DiagonalInjectionIsAnnihilatedExactly) {
    const Scene sc = build_scene(small_spec());
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    SunkField u = detail::sunk_field_for(eng);
    for (std::size_t j = 1; j < u.axis(0).n; ++j)
        for (std::size_t i = 0; i < eng.lateral(); ++i) u(j, i, i) = std::sin(0.3 * static_cast<double>(i + 7 * j));
    const SunkField m = apply_offset_mult(u);
    for (double v : m.values()) EXPECT_EQ(v, 0.0);
    const DataCube d = k_forward(eng, m);
    for (double v : d.values()) EXPECT_EQ(v, 0.0);
}

TEST(Annihilate, LinearAndTimeTranslationInvariant) {
    const Scene sc = point_scene(ModelKind::lens);
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    const DataCube d = born_model(eng, sc.dc);
    DataCube d3 = d;
    for (double& v : d3.storage()) v *= 3.0;
    const DataCube w = annihilate(eng, d), w3 = annihilate(eng, d3);
    const double scale = testing_support::max_abs(w.values());
    ASSERT_GT(scale, 0.0);
    for (std::size_t k = 0; k < w.size(); ++k) EXPECT_NEAR(w3.storage()[k], 3.0 * w.storage()[k], 1e-12 * scale);

    // Shifting the data moves the event to another depth; on a 20 m grid the
    // t = 0 sampling of a sub-cell move shows up as a bounded wobble only.
    const std::size_t nt = sc.geometry.t.n;
    const double a = std::sqrt(sq_norm(w.values()));
    for (std::size_t shift : {1u, 4u, 9u, 20u}) {
        DataCube sh(d.axes());
        for (std::size_t tr = 0; tr < d.size() / nt; ++tr)
            for (std::size_t k = 0; k < nt; ++k) sh.storage()[tr * nt + (k + shift) % nt] = d.storage()[tr * nt + k];
        const double b = std::sqrt(sq_norm(annihilate(eng, sh).values()));
        EXPECT_GT(b, 0.6 * a) << shift;
        EXPECT_LT(b, 1.6 * a) << shift;
    }
}

TEST(Annihilate, ResidualReport) {
    const Scene sc = point_scene();
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    const DataCube d = born_model(eng, sc.dc);
    const AnnihilatorResidual r = annihilator_residual(eng, d);
    EXPECT_DOUBLE_EQ(r.h_ref, 31.0 * 20.0);
    EXPECT_GT(r.norm_kk, 0.0);
    EXPECT_NEAR(r.norm_wd, std::sqrt(sq_norm(annihilate(eng, d).values())), 1e-12 * r.norm_wd);
    EXPECT_DOUBLE_EQ(r.ratio, r.norm_wd / (r.h_ref * r.norm_kk));
    EXPECT_LT(r.ratio, 1.0);
}

TEST(Semblance, ScanContracts) {
    const Scene sc = point_scene();
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    const DataCube d = born_model(eng, sc.dc);
    const MuteConfig mute;
    const TaperConfig tc;
    const SemblanceScan one = semblance_scan(d, sc.model, sc.geometry, mute, tc, {1.0});
    ASSERT_EQ(one.points.size(), 1u);
    EXPECT_GE(one.points[0].j, 0.0);
    EXPECT_EQ(one.argmin, 0u);

    DataCube d5 = d;
    for (double& v : d5.storage()) v *= 5.0;
    const SemblanceScan five = semblance_scan(d5, sc.model, sc.geometry, mute, tc, {1.0});
    EXPECT_NEAR(five.points[0].j, one.points[0].j, 1e-12 * one.points[0].j);

    EXPECT_THROW(semblance_scan(d, sc.model, sc.geometry, mute, tc, {}), RangeError);
    EXPECT_THROW(semblance_scan(d, sc.model, sc.geometry, mute, tc, {1.0, -0.5}), RangeError);
    EXPECT_THROW(semblance_scan(DataCube(d.axes()), sc.model, sc.geometry, mute, tc, {1.0}), DataError);
}

TEST(Semblance, SmallSceneMinimumNearTruth) {
    const Scene sc = point_scene();
    const DsrEngine eng(sc.model, sc.geometry, TaperConfig{}, MuteConfig{});
    const DataCube d = born_model(eng, sc.dc);
    const SemblanceScan s = semblance_scan(d, sc.model, sc.geometry, MuteConfig{}, TaperConfig{}, {0.9, 1.0, 1.1});
    EXPECT_EQ(s.argmin, 1u);
}

TEST(ScanScales, InclusiveGrid) {
    const auto s = scan_scales(0.9, 1.1, 0.01);
    ASSERT_EQ(s.size(), 21u);
    EXPECT_DOUBLE_EQ(s.front(), 0.9);
    EXPECT_NEAR(s.back(), 1.1, 1e-12);
    EXPECT_EQ(scan_scales(1.0, 1.0, 0.1).size(), 1u);
    EXPECT_THROW(scan_scales(1.1, 0.9, 0.01), RangeError);
    EXPECT_THROW(scan_scales(0.9, 1.1, 0.0), RangeError);
    EXPECT_THROW(scan_scales(0.0, 1.1, 0.1), RangeError);
}

TEST(DpAnnihilator, ConstantAndLinearGathers) {
    const Axis p = p_axis(-2e-4, 2e-4, 5);
    AngleGather g({make_axis(3, 10.0, 0.0, "z"), make_axis(2, 20.0, 0.0, "x"), p});
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t ip = 0; ip < 5; ++ip) g(j, i, ip) = 1.0 + static_cast<double>(j + i);
    const AngleGather d0 = dp_annihilate(g);
    for (double v : d0.values()) EXPECT_EQ(v, 0.0);

    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t ip = 0; ip < 5; ++ip) g(j, i, ip) = 4.0 + 3e4 * p.coord(ip);
    const AngleGather d1 = dp_annihilate(g);
    for (double v : d1.values()) EXPECT_NEAR(v, 3e4, 1e-6);
    EXPECT_GT(dp_ratio(g), 0.0);
}

TEST(DpAnnihilator, Contracts) {
    AngleGather g({make_axis(3, 10.0, 0.0, "z"), make_axis(2, 20.0, 0.0, "x"), p_axis(-1e-4, 1e-4, 2)});
    EXPECT_THROW(dp_annihilate(g), AxisError);
    AngleGather z({make_axis(3, 10.0, 0.0, "z"), make_axis(2, 20.0, 0.0, "x"), p_axis(-1e-4, 1e-4, 3)});
    EXPECT_THROW(dp_ratio(z), DataError);
}
