#include <gtest/gtest.h>

#include <cmath>

#include "nanocoupler/geometry/rasterize.hpp"

using namespace nc;
using namespace nc::geometry;

namespace {

MaterialModel test_metal()
{
    return MaterialModel::drude({4.0, ev_to_rad_per_s(9.0), ev_to_rad_per_s(0.05), 1e5}, std::nullopt, "metal");
}

ButtJointParams fig1_params()
{
    ButtJointParams p;
    p.metal = test_metal();
    p.launch_length_nm = 1400.0;
    p.receive_length_nm = 1400.0;
    p.r_max_nm = 1300.0;
    return p;
}

Scene empty_scene()
{
    Scene s;
    s.domain = {40.0, -20.0, 20.0};
    return s;
}

}  // namespace

TEST(Rasterize, VacuumIsUniform)
{
    const auto m = rasterize(empty_scene(), 2.0);
    EXPECT_EQ(m.grid.nr, 20);
    EXPECT_EQ(m.grid.nz, 20);
    EXPECT_EQ(m.er.size(), std::size_t(20 * 21));
    EXPECT_EQ(m.ez.size(), std::size_t(21 * 20));
    for (double e : m.er.eps_inf) EXPECT_EQ(e, 1.0);
    for (double e : m.ez.eps_inf) EXPECT_EQ(e, 1.0);
    EXPECT_TRUE(m.er.metal.empty());
    EXPECT_TRUE(m.ez.metal.empty());
}

TEST(Rasterize, CylinderOnCellEdgeIsHalfFilled)
{
    // Radius 20 nm = 10 h lies on the edge of the Er cells, so the Ez dual
    // cells centred there straddle it symmetrically.
    auto s = empty_scene();
    s.elements.push_back({Cylinder{20.0, -20.0, 20.0}, test_metal(), "wire"});
    const auto m = rasterize(s, 2.0);
    const int nz = m.ez.n_z;
    int boundary = 0;
    for (const auto& c : m.ez.metal) {
        const int i = static_cast<int>(c.index) / nz;
        if (i == 10) {
            EXPECT_FLOAT_EQ(c.fraction, 0.5f);
            ++boundary;
        } else {
            EXPECT_LT(i, 10);
            EXPECT_FLOAT_EQ(c.fraction, 1.0f);
        }
    }
    EXPECT_EQ(boundary, nz);

    auto d = empty_scene();
    d.elements.push_back({Cylinder{20.0, -20.0, 20.0}, MaterialModel::dielectric(2.0), "rod"});
    const auto md = rasterize(d, 2.0);
    // Ez is tangential to the cylinder wall: arithmetic mean.
    EXPECT_NEAR(md.ez.eps_inf[10 * md.ez.n_z + 5], 0.5 * (4.0 + 1.0), 1e-12);
    EXPECT_NEAR(md.ez.eps_inf[9 * md.ez.n_z + 5], 4.0, 1e-12);
}

TEST(Rasterize, PlanarInterfaceUsesNormalHarmonicMean)
{
    // Dielectric half-space starting at z = 1 nm, the centre of Ez row j = 10.
    auto s = empty_scene();
    s.elements.push_back({HalfSpace{1.0, +1}, MaterialModel::dielectric(2.0), "slab"});
    const auto m = rasterize(s, 2.0);
    const double harm = 1.0 / (0.5 / 4.0 + 0.5 / 1.0);
    EXPECT_NEAR(m.er.eps_inf[3 * m.er.n_z + 10], 1.0, 1e-12);  // Er at z=0 lies fully below
    // Ez at z = 1 nm: its dual cell [0, 2] is cut in half by a z-normal interface.
    EXPECT_NEAR(m.ez.eps_inf[3 * m.ez.n_z + 10], harm, 1e-12);
    // Er at z = 2 nm sees the interface at z = 1 as its dual-cell edge.
    EXPECT_NEAR(m.er.eps_inf[3 * m.er.n_z + 11], 4.0, 1e-12);
}

TEST(Rasterize, Deterministic)
{
    const auto s = butt_joint_scene(fig1_params());
    const auto a = rasterize(s, 4.0);
    const auto b = rasterize(s, 4.0);
    EXPECT_TRUE(a.er == b.er);
    EXPECT_TRUE(a.ez == b.ez);
    for (const auto* c : {&a.er, &a.ez})
        for (const auto& mc : c->metal) {
            EXPECT_GE(mc.fraction, 0.0f);
            EXPECT_LE(mc.fraction, 1.0f);
        }
}

TEST(ButtJoint, SharpJointAndGap)
{
    auto p = fig1_params();
    const auto s = butt_joint_scene(p);
    EXPECT_TRUE(s.material_at(10.0, -1.0).is_dispersive());
    EXPECT_FALSE(s.material_at(200.0, -1.0).is_dispersive());
    EXPECT_EQ(s.material_at(200.0, 1.0).eps_static(), 1.45 * 1.45);
    EXPECT_EQ(s.material_at(400.0, 1.0).eps_static(), 1.0);

    p.gap_nm = 50.0;
    const auto g = butt_joint_scene(p);
    EXPECT_EQ(g.material_at(10.0, 25.0).eps_static(), 1.0);
    EXPECT_EQ(g.material_at(10.0, 51.0).eps_static(), 1.45 * 1.45);
    EXPECT_TRUE(g.material_at(10.0, -1.0).is_dispersive());

    p.gap_nm = 0.0;
    p.direction = Direction::DFtoMW;
    const auto r = butt_joint_scene(p);
    EXPECT_TRUE(r.material_at(10.0, 1.0).is_dispersive());
    EXPECT_EQ(r.material_at(200.0, -1.0).eps_static(), 1.45 * 1.45);
}

TEST(ButtJoint, RoundingLimitsAndErrors)
{
    auto p = fig1_params();
    p.edge_radius_nm = p.r_mw_nm;  // hemispherical cap
    const auto s = butt_joint_scene(p);
    EXPECT_TRUE(s.material_at(0.0, -1.0).is_dispersive());
    EXPECT_FALSE(s.material_at(160.0, -1.0).is_dispersive());
    EXPECT_TRUE(s.material_at(160.0, -p.r_mw_nm).is_dispersive());
    const double c = p.r_mw_nm / std::sqrt(2.0);
    EXPECT_TRUE(s.material_at(c - 0.5, -p.r_mw_nm + c - 0.5).is_dispersive());
    EXPECT_FALSE(s.material_at(c + 0.5, -p.r_mw_nm + c + 0.5).is_dispersive());

    p.edge_radius_nm = p.r_mw_nm + 1.0;
    EXPECT_THROW(butt_joint_scene(p), Error);

    p = fig1_params();
    p.gap_nm = -5.0;
    try {
        butt_joint_scene(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Geometry);
        EXPECT_NE(std::string(e.what()).find("gap must be >= 0"), std::string::npos);
    }
    p = fig1_params();
    p.r_max_nm = 1000.0;  // < 2 lambda
    EXPECT_THROW(butt_joint_scene(p), Error);
}

TEST(Snom, DefaultTipParametersAndTangentApex)
{
    SnomParams p;
    p.metal = test_metal();
    p.df_length_nm = 1600.0;
    p.substrate_depth_nm = 200.0;
    p.r_max_nm = 1600.0;
    const auto s = snom_scene(p);
    ASSERT_TRUE(s.emitter_z_nm.has_value());

    const auto& cone = std::get<ConeParaboloid>(s.elements[1].shape);
    EXPECT_NEAR(cone.half_angle_deg, 7.0, 1e-12);
    EXPECT_NEAR(cone.radius_at(0.0), 0.0, 1e-12);
    // Radius and slope are continuous where the paraboloid meets the cone.
    const double lp = cone.paraboloid_length();
    EXPECT_NEAR(cone.radius_at(lp - 1e-7), cone.radius_at(lp + 1e-7), 1e-6);
    const double slope_in = (cone.radius_at(lp) - cone.radius_at(lp - 1e-3)) / 1e-3;
    const double slope_out = (cone.radius_at(lp + 1e-3) - cone.radius_at(lp)) / 1e-3;
    EXPECT_NEAR(slope_in, slope_out, 1e-3);
    EXPECT_NEAR(slope_out, std::tan(7.0 * pi / 180.0), 1e-6);
    // Apex curvature radius: r^2 = 2 rho d near the tip.
    EXPECT_NEAR(cone.radius_at(0.01) * cone.radius_at(0.01) / (2.0 * 0.01), 10.0, 1e-9);

    const double z_sub = cone.tip_z_nm + 5.0;
    EXPECT_NEAR(*s.emitter_z_nm, z_sub + 5.0, 1e-12);
    EXPECT_EQ(s.material_at(0.0, z_sub + 1.0).eps_static(), 1.7 * 1.7);
    EXPECT_EQ(s.material_at(0.0, z_sub - 1.0).eps_static(), 1.0);
    EXPECT_TRUE(s.material_at(0.0, cone.tip_z_nm - 1.0).is_dispersive());
    EXPECT_TRUE(s.material_at(150.0, 1.0).is_dispersive());
    EXPECT_EQ(s.material_at(300.0, -1.0).eps_static(), 1.45 * 1.45);
}

TEST(Snom, ErrorsAndResolutionWarning)
{
    SnomParams p;
    p.metal = test_metal();
    p.df_length_nm = 1600.0;
    p.substrate_depth_nm = 200.0;
    p.r_max_nm = 1600.0;

    auto bad = p;
    bad.opening_angle_deg = 0.0;
    EXPECT_THROW(snom_scene(bad), Error);

    auto s = snom_scene(p);
    // Gap of exactly one cell is accepted but flagged.
    auto small = s;
    small.domain = {1600.0, -1600.0, s.domain.z_max_nm};
    const auto m = rasterize(small, 5.0);
    ASSERT_EQ(m.warnings.size(), 1u);
    EXPECT_NE(m.warnings[0].find("< 4"), std::string::npos);

    // Cone taller than the domain.
    auto tall = s;
    tall.domain.z_max_nm = std::get<ConeParaboloid>(s.elements[1].shape).tip_z_nm - 10.0;
    EXPECT_THROW(tall.validate(), Error);
}
