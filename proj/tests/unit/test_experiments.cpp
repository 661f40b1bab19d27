#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "nanocoupler/experiments/snom.hpp"
#include "nanocoupler/experiments/sweeps.hpp"
#include "nanocoupler/materials/library.hpp"

using namespace nc;
using namespace nc::experiments;

namespace {

ButtJointParams coarse_joint()
{
    materials::MaterialLibrary lib;
    ButtJointParams p;
    p.metal = lib.metal("ag", "", 633.0);
    return p;
}

EtaOptions coarse_options()
{
    EtaOptions o;
    o.pitch_nm = 10.0;
    return o;
}

geometry::SnomParams small_tip()
{
    materials::MaterialLibrary lib;
    geometry::SnomParams p;
    p.lambda_vac_nm = 780.0;
    p.df_radius_nm = 300.0;
    p.cone_base_radius_nm = 60.0;
    p.opening_angle_deg = 60.0;
    p.apex_radius_nm = 12.0;
    p.tip_substrate_gap_nm = 16.0;
    p.emitter_depth_nm = 16.0;
    p.metal = lib.metal("au", "", 780.0);
    p.df_length_nm = 468.0;
    p.substrate_depth_nm = 234.0;
    p.r_max_nm = 1560.0;
    return p;
}

SnomOptions small_tip_options()
{
    SnomOptions o;
    o.pitch_nm = 4.0;
    o.box_half_size_nm = 8.0;
    return o;
}

}  // namespace

TEST(Digest, KnownFnvVectors)
{
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Digest, NumberTextRoundTrips)
{
    EXPECT_EQ(fmt(0.1), "0.1");
    EXPECT_EQ(fmt(633.0), "633");
    for (double v : {1.0 / 3.0, 2.0 / 7.0 * 1e-19, 164.25, -5e300})
        EXPECT_EQ(std::stod(fmt(v)), v);
}

TEST(Pool, SlotsAreIndependentOfScheduling)
{
    std::vector<double> a(100), b(100);
    parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = std::sin(double(i)); });
    parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = std::sin(double(i)); });
    EXPECT_EQ(a, b);
}

TEST(Pool, EveryIndexRunsOnce)
{
    std::vector<std::atomic<int>> hits(57);
    parallel_for(hits.size(), 3, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Pool, RethrowsWorkerError)
{
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw Error(ErrorKind::Config, "boom");
                              }),
                 Error);
}

TEST(ButtJoint, CoarseRunIsPhysicalAndCloses)
{
    ReferenceCache cache;
    const auto r = measure_eta(coarse_joint(), coarse_options(), &cache);
    EXPECT_GT(r.eta, 0.5);
    EXPECT_LT(r.eta, 1.0);
    EXPECT_GE(r.reflectivity, 0.0);
    EXPECT_LT(r.reflectivity, 0.2);
    EXPECT_NEAR(r.closure, 1.0, 0.02);
    EXPECT_GT(r.absorbed_fraction, 0.0);
    EXPECT_GT(r.incident_power_w, 0.0);
    EXPECT_EQ(r.config_digest.size(), 16u);
    EXPECT_DOUBLE_EQ(r.grid_pitch_nm, 164.0 / 16.0);
    EXPECT_GT(r.launch_loss_db_per_um, 0.0);

    // A cached reference and a rerun give the same numbers bit for bit.
    const auto again = measure_eta(coarse_joint(), coarse_options(), &cache);
    EXPECT_EQ(again.eta, r.eta);
    EXPECT_EQ(again.reflectivity, r.reflectivity);
    EXPECT_EQ(again.config_digest, r.config_digest);
}

TEST(ButtJoint, PitchIsNudgedOntoTheWireSurface)
{
    auto p = coarse_joint();
    auto o = coarse_options();
    for (double r : {164.0, 68.0, 180.0}) {
        p.r_mw_nm = r;
        const double h = effective_pitch(p, o);
        const double cells = r / h;
        EXPECT_NEAR(cells, std::round(cells), 1e-9) << r;
        EXPECT_LE(std::abs(h - o.pitch_nm), 0.5 * o.pitch_nm) << r;
    }
    p.r_mw_nm = 3.0;
    EXPECT_EQ(effective_pitch(p, o), 3.0);
    o.align_to_wire = false;
    EXPECT_EQ(effective_pitch(p, o), 10.0);
    o.pitch_nm = 0.0;
    EXPECT_THROW(effective_pitch(p, o), Error);
}

TEST(ButtJoint, ReciprocalDirectionsAgree)
{
    auto p = coarse_joint();
    const auto fwd = measure_eta(p, coarse_options());
    p.direction = Direction::DFtoMW;
    const auto back = measure_eta(p, coarse_options());
    EXPECT_NEAR(back.eta / fwd.eta, 1.0, 0.01);
    EXPECT_NE(back.config_digest, fwd.config_digest);
}

TEST(ButtJoint, DigestTracksInputs)
{
    auto p = coarse_joint();
    const auto o = coarse_options();
    const auto d0 = fnv1a_hex(describe(p, o));
    EXPECT_EQ(d0, fnv1a_hex(describe(p, o)));
    p.r_df_nm += 1.0;
    EXPECT_NE(d0, fnv1a_hex(describe(p, o)));
}

TEST(ButtJoint, MonitorTooCloseToSourceIsConfigError)
{
    auto o = coarse_options();
    o.monitor_offset_nm = 1200.0;
    try {
        measure_eta(coarse_joint(), o);
        FAIL() << "expected a config error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(ButtJoint, GuideBelowCutoffIsNoMode)
{
    auto p = coarse_joint();
    p.r_df_nm = 60.0;
    try {
        measure_eta(p, coarse_options());
        FAIL() << "expected a no-mode error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoMode);
    }
}

TEST(Sweeps, EmptyAxisIsConfigError)
{
    SweepOptions so;
    so.eta = coarse_options();
    EXPECT_THROW(rounding_scan(coarse_joint(), {}, so), Error);
    EXPECT_THROW(radius_map(coarse_joint(), {160.0}, {}, so), Error);
    SpectrumSpec spec;
    EXPECT_THROW(wavelength_sweep(spec, so), Error);
}

TEST(Sweeps, FailedPointsAreRecordedNotFatal)
{
    SweepOptions so;
    so.eta = coarse_options();
    const auto res = radius_map(coarse_joint(), {164.0}, {60.0, 342.0}, so);
    ASSERT_EQ(res.points.size(), 2u);
    EXPECT_FALSE(res.points[0].result.has_value());
    EXPECT_FALSE(res.points[0].error.empty());
    ASSERT_TRUE(res.points[1].result.has_value());
    ASSERT_TRUE(res.argmax.has_value());
    EXPECT_EQ(*res.argmax, 1u);
    EXPECT_FALSE(res.complete());
}

TEST(Sweeps, ThreadCountDoesNotChangeResults)
{
    SweepOptions one, two;
    one.eta = two.eta = coarse_options();
    two.threads = 2;
    const auto a = radius_map(coarse_joint(), {150.0, 170.0}, {342.0}, one);
    const auto b = radius_map(coarse_joint(), {150.0, 170.0}, {342.0}, two);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        ASSERT_TRUE(a.points[k].result && b.points[k].result);
        EXPECT_EQ(a.points[k].result->eta, b.points[k].result->eta);
        EXPECT_EQ(a.points[k].result->reflectivity, b.points[k].result->reflectivity);
    }
    EXPECT_EQ(a.argmax, b.argmax);
}

TEST(Sweeps, LowIndexIsRejectedPerPoint)
{
    SweepOptions so;
    so.eta = coarse_options();
    const auto res = index_sweep(coarse_joint(), {1.1}, [](double) { return std::pair{164.0, 342.0}; }, so);
    ASSERT_EQ(res.points.size(), 1u);
    EXPECT_FALSE(res.points[0].result.has_value());
    EXPECT_NE(res.points[0].error.find("domain"), std::string::npos);
}

TEST(Sweeps, RelativeSpanIsSymmetric)
{
    const auto v = relative_span(100.0, 0.2, 5);
    ASSERT_EQ(v.size(), 5u);
    EXPECT_DOUBLE_EQ(v.front(), 80.0);
    EXPECT_DOUBLE_EQ(v[2], 100.0);
    EXPECT_DOUBLE_EQ(v.back(), 120.0);
    EXPECT_EQ(relative_span(7.0, 0.5, 1), std::vector<double>{7.0});
}

TEST(Snom, GoldTipConcentratesTheGapField)
{
    auto p = small_tip();
    const auto gold = snom_run(p, SnomMode::Illuminate, small_tip_options());
    p.metal = materials::MaterialModel::dielectric(1.45, "glass");
    const auto glass = snom_run(p, SnomMode::Illuminate, small_tip_options());
    EXPECT_GT(gold.enhancement, 20.0 * glass.enhancement);
    EXPECT_GE(gold.enhancement, gold.enhancement_midpoint);
    EXPECT_GT(glass.enhancement, 0.01);
    EXPECT_LT(glass.enhancement, 10.0);
}

TEST(Snom, CollectedPowerIsAFractionOfTheDipolePower)
{
    const auto r = snom_run(small_tip(), SnomMode::Collect, small_tip_options());
    EXPECT_GT(r.dipole_power, 0.0);
    EXPECT_GT(r.collection_eta, 0.0);
    EXPECT_LT(r.collection_eta, 1.0);
}

TEST(Snom, UnderResolvedGapIsRefused)
{
    auto o = small_tip_options();
    o.pitch_nm = 8.0;
    try {
        snom_run(small_tip(), SnomMode::Illuminate, o);
        FAIL() << "coarse gap accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Resolution);
    }
}
