#include <gtest/gtest.h>

#include <cmath>

#include "nanocoupler/materials/library.hpp"
#include "nanocoupler/modes/mode_matching.hpp"

using namespace nc;
using namespace nc::modes;

namespace {

materials::MaterialLibrary& lib()
{
    static materials::MaterialLibrary l;
    return l;
}

GuidedMode silver_wire(double r, double step = 2.0)
{
    const auto ag = lib().metal("ag", "rakic", 633.0);
    return solve_wire_spp(materials::eval_permittivity(ag, 633.0), 1.0, r, 633.0, {step});
}

// Synthetic mode whose fields are confined to [r0, r1].
GuidedMode box_mode(double r0, double r1)
{
    GuidedMode m = solve_fiber_tm01(1.45, 1.0, 342.0, 633.0);
    auto& p = m.profile;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool on = p.r[i] >= r0 && p.r[i] <= r1;
        p.er[i] = on ? 1.0 : 0.0;
        p.hphi[i] = on ? 1.0 : 0.0;
        p.ez[i] = 0.0;
    }
    const bool edge_on = p.interface_nm >= r0 && p.interface_nm <= r1;
    p.inner_limit = p.outer_limit = edge_on ? FieldSample{1.0, 0.0, 1.0} : FieldSample{};
    return m;
}

}  // namespace

TEST(ModeMatching, SelfOverlapIsOne)
{
    const auto f = solve_fiber_tm01(1.45, 1.0, 342.0, 633.0);
    const auto w = silver_wire(164.0);
    for (auto form : {OverlapForm::Unconjugated, OverlapForm::Conjugated}) {
        EXPECT_NEAR(match_modes(f, f, form).eta_estimate, 1.0, 1e-9);
        EXPECT_NEAR(match_modes(w, w, form).eta_estimate, 1.0, 1e-9);
    }
}

TEST(ModeMatching, SwapSymmetryAndScaleInvariance)
{
    const auto f = solve_fiber_tm01(1.45, 1.0, 342.0, 633.0);
    const auto w = silver_wire(164.0);
    for (auto form : {OverlapForm::Unconjugated, OverlapForm::Conjugated}) {
        const double ab = match_modes(w, f, form).eta_estimate;
        EXPECT_NEAR(ab, match_modes(f, w, form).eta_estimate, 1e-10);
        EXPECT_GT(ab, 0.0);
        EXPECT_LE(ab, 1.0);
        const auto wn = normalize_to_power(w, 3.7e-2);
        EXPECT_NEAR(ab, match_modes(wn, f, form).eta_estimate, 1e-10);
    }
    const auto rep = match_modes(w, f);
    EXPECT_NEAR(rep.eta_estimate, std::norm(rep.overlap_integral) / (rep.normalization_a * rep.normalization_b),
                1e-12);
}

TEST(ModeMatching, DisjointSupportsDoNotOverlap)
{
    const auto a = box_mode(10.0, 200.0);
    const auto b = box_mode(600.0, 900.0);
    EXPECT_LT(match_modes(a, b).eta_estimate, 1e-6);
}

TEST(ModeMatching, QuadratureConvergence)
{
    const double coarse = match_modes(silver_wire(164.0, 2.0), solve_fiber_tm01(1.45, 1.0, 342.0, 633.0, {2.0}))
                              .eta_estimate;
    const double fine = match_modes(silver_wire(164.0, 1.0), solve_fiber_tm01(1.45, 1.0, 342.0, 633.0, {1.0}))
                            .eta_estimate;
    EXPECT_LT(std::abs(coarse - fine), 1e-4);
    // Profiles on different grids are interpolated onto the union grid.
    const double mixed = match_modes(silver_wire(164.0, 1.0), solve_fiber_tm01(1.45, 1.0, 342.0, 633.0, {2.0}))
                             .eta_estimate;
    EXPECT_LT(std::abs(mixed - fine), 1e-4);
}

TEST(ModeMatching, AgreesWithAnalyticQuadrature)
{
    // Gauss-Legendre on the analytic fields, split at both interfaces.
    const auto w = silver_wire(164.0);
    const auto f = solve_fiber_tm01(1.45, 1.0, 342.0, 633.0);
    auto integral = [](const GuidedMode& p, const GuidedMode& q) {
        auto g = [&](double r) { return p.field(r).er * q.field(r).hphi * r; };
        return modes::detail::radial_integral(g, {164.0 - 60.0, 164.0, 342.0}, 150.0);
    };
    const Complex x = integral(w, f), y = integral(f, w);
    const double eta = std::abs(x * y) / std::abs(integral(w, w) * integral(f, f));
    EXPECT_NEAR(match_modes(w, f).eta_estimate, eta, 2e-4);
}

TEST(ModeMatching, WavelengthMismatchIsConfigError)
{
    const auto a = solve_fiber_tm01(1.45, 1.0, 342.0, 633.0);
    const auto b = solve_fiber_tm01(1.45, 1.0, 342.0, 700.0);
    try {
        match_modes(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(SeedRadii, SinglePointBoxAndCutoffBox)
{
    const auto ag = lib().metal("ag", "rakic", 633.0);
    const auto s = seed_radii(ag, 1.45, 633.0, {164.0, 164.0, 342.0, 342.0, 4.0});
    EXPECT_DOUBLE_EQ(s.r_mw_nm, 164.0);
    EXPECT_DOUBLE_EQ(s.r_df_nm, 342.0);
    EXPECT_NEAR(s.eta_estimate, match_modes(silver_wire(164.0), solve_fiber_tm01(1.45, 1.0, 342.0, 633.0)).eta_estimate,
                1e-12);

    try {
        seed_radii(ag, 1.45, 633.0, {100.0, 120.0, 50.0, 80.0, 4.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoMode);
    }
    EXPECT_THROW(seed_radii(ag, 1.45, 633.0, {100.0, 90.0, 250.0, 300.0, 4.0}), Error);
}

TEST(SeedRadii, ArgmaxMatchesExhaustiveScan)
{
    const auto ag = lib().metal("ag", "rakic", 633.0);
    const SearchBox box{150.0, 174.0, 330.0, 354.0, 8.0};
    const auto s = seed_radii(ag, 1.45, 633.0, box);
    double best = -1.0;
    for (double rw = 150.0; rw <= 174.0; rw += 8.0)
        for (double rf = 330.0; rf <= 354.0; rf += 8.0)
            best = std::max(best, match_modes(silver_wire(rw), solve_fiber_tm01(1.45, 1.0, rf, 633.0)).eta_estimate);
    EXPECT_DOUBLE_EQ(s.eta_estimate, best);
}
