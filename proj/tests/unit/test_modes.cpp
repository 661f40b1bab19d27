#include <gtest/gtest.h>

#include <cmath>

#include "nanocoupler/materials/library.hpp"
#include "nanocoupler/modes/solvers.hpp"

using namespace nc;
using namespace nc::modes;

namespace {

// Independent TM01 oracle: std::cyl_bessel_* in the pole-free dispersion form,
// sign scan over n_eff at 1e-5 resolution followed by plain bisection.
double oracle_fiber_neff(double n1, double n2, double a, double lambda)
{
    const double ka = 2.0 * pi / lambda * a;
    auto g = [&](double n) {
        const double u = ka * std::sqrt(n1 * n1 - n * n);
        const double w = ka * std::sqrt(n * n - n2 * n2);
        return n1 * n1 * std::cyl_bessel_j(1.0, u) * w * std::cyl_bessel_k(0.0, w) +
               n2 * n2 * std::cyl_bessel_k(1.0, w) * u * std::cyl_bessel_j(0.0, u);
    };
    // TM01 is the highest-index root; scan downward from the core index.
    double hi = n1 - 1e-5;
    double ghi = g(hi);
    for (double n = hi - 1e-5; n > n2; n -= 1e-5) {
        const double gn = g(n);
        if ((gn < 0) != (ghi < 0)) {
            double lo = n;
            for (int i = 0; i < 200; ++i) {
                const double m = 0.5 * (lo + hi);
                if ((g(m) < 0) == (g(lo) < 0)) lo = m; else hi = m;
            }
            return 0.5 * (lo + hi);
        }
        hi = n;
        ghi = gn;
    }
    return NAN;
}

Complex silver_633()
{
    static materials::MaterialLibrary lib;
    return materials::eval_permittivity(lib.metal("ag", "jc", 633.0), 633.0);
}

}  // namespace

TEST(FiberTM01, MatchesSignScanOracle)
{
    const auto m = solve_fiber_tm01(1.45, 1.0, 342.0, 633.0);
    const double ref = oracle_fiber_neff(1.45, 1.0, 342.0, 633.0);
    EXPECT_NEAR(m.n_eff.real(), ref, 1e-9);
    EXPECT_EQ(m.n_eff.imag(), 0.0);
    EXPECT_GT(m.n_eff.real(), 1.0);
    EXPECT_LT(m.n_eff.real(), 1.45);
    EXPECT_NEAR(m.n_eff.real(), 1.1276894, 1e-6);  // regression, n = 1.45 silica
    EXPECT_LT(std::abs(fiber_tm_ratio_residual(m.n_eff.real(), 1.45, 1.0, 342.0, 633.0)), 1e-10);
    EXPECT_DOUBLE_EQ(propagation_loss_db_per_um(m), 0.0);
}

TEST(FiberTM01, PlaneWaveLimitAndCutoff)
{
    const auto big = solve_fiber_tm01(1.45, 1.0, 50.0 * 633.0, 633.0);
    EXPECT_NEAR(big.n_eff.real(), 1.45, 1e-3);

    // V = 2.3 < 2.405
    const double a = 2.3 / (2.0 * pi / 633.0 * std::sqrt(1.45 * 1.45 - 1.0));
    try {
        solve_fiber_tm01(1.45, 1.0, a, 633.0);
        FAIL() << "expected no-mode error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoMode);
        ASSERT_FALSE(e.trace().empty());
        EXPECT_NEAR(e.trace()[0], 2.3, 1e-9);
    }
    EXPECT_THROW(solve_fiber_tm01(1.0, 1.45, 300.0, 633.0), Error);
}

TEST(WireSPP, ResidualBranchAndProfile)
{
    const Complex eps = silver_633();
    const auto m = solve_wire_spp(eps, 1.0, 164.0, 633.0);
    EXPECT_LT(std::abs(wire_tm_residual(m.n_eff, eps, 1.0, 164.0, 633.0)), 1e-10);
    EXPECT_GT(m.n_eff.imag(), 0.0);
    EXPECT_GT(m.n_eff.real(), 1.0);
    EXPECT_GT(m.q_clad().real(), 0.0);

    // |Hphi| peaks at the metal surface.
    const auto& p = m.profile;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (std::abs(p.hphi[i]) > std::abs(p.hphi[imax])) imax = i;
    EXPECT_NEAR(p.r[imax], 164.0, p.step_nm);
}

TEST(WireSPP, PlanarLimit)
{
    const Complex eps = silver_633();
    const auto m = solve_wire_spp(eps, 1.0, 20.0 * 633.0, 633.0);
    EXPECT_LT(std::abs(m.n_eff - planar_spp_index(eps, 1.0)), 1e-3);
    // The curvature correction shrinks like 1/radius.
    const auto m2 = solve_wire_spp(eps, 1.0, 40.0 * 633.0, 633.0);
    EXPECT_LT(std::abs(m2.n_eff - planar_spp_index(eps, 1.0)), 0.6 * std::abs(m.n_eff - planar_spp_index(eps, 1.0)));
}

TEST(WireSPP, NoSppAboveLightLineMetal)
{
    try {
        solve_wire_spp(Complex(-0.5, 0.1), 1.0, 100.0, 633.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoMode);
    }
}

TEST(Modes, FieldContinuityAndDecay)
{
    const auto wire = solve_wire_spp(silver_633(), 1.0, 164.0, 633.0);
    const auto fiber = solve_fiber_tm01(1.45, 1.0, 342.0, 633.0);
    for (const auto* m : {&wire, &fiber}) {
        const double a = m->radius_nm;
        const auto in = m->field(std::nextafter(a, 0.0));
        const auto out = m->field(a);
        EXPECT_LT(std::abs(in.ez - out.ez) / std::abs(out.ez), 1e-8);
        EXPECT_LT(std::abs(in.hphi - out.hphi) / std::abs(out.hphi), 1e-8);
        // D_r = eps Er is continuous, so Er jumps by the permittivity ratio.
        EXPECT_LT(std::abs(m->eps_core * in.er - m->eps_clad * out.er) / std::abs(out.er), 1e-8);

        double prev = INFINITY;
        for (double r = 1.5 * a; r < 6.0 * m->lambda_vac_nm; r += 5.0) {
            const double v = std::abs(m->field(r).hphi);
            EXPECT_LT(v, prev) << r;
            prev = v;
        }
        const auto& p = m->profile;
        double peak = 0.0;
        for (const auto& h : p.hphi) peak = std::max(peak, std::abs(h));
        EXPECT_LE(std::abs(p.hphi.back()), 1e-3 * peak);
        EXPECT_GE(p.extent(), 4.0 * m->lambda_vac_nm);
    }
}

TEST(Modes, PowerNormalization)
{
    const auto wire = solve_wire_spp(silver_633(), 1.0, 164.0, 633.0);
    const auto fiber = solve_fiber_tm01(1.45, 1.0, 342.0, 633.0);
    for (const auto* m : {&wire, &fiber}) {
        EXPECT_NEAR(profile_power(m->profile) / m->power_norm_w, 1.0, 1e-3);
        const auto n = normalize_to_power(*m, 1e-3);
        EXPECT_NEAR(mode_power(n) / 1e-3, 1.0, 1e-3);
        EXPECT_NEAR(profile_power(n.profile) / 1e-3, 1.0, 1e-3);
        EXPECT_NEAR(n.power_norm_w / 1e-3, 1.0, 1e-3);

        auto doubled = *m;
        doubled.amplitude *= 2.0;
        doubled.profile.scale(2.0);
        const auto n2 = normalize_to_power(doubled, 1e-3);
        EXPECT_NEAR(std::abs(n2.amplitude - n.amplitude) / std::abs(n.amplitude), 0.0, 1e-12);
    }
    EXPECT_THROW(normalize_to_power(wire, 0.0), Error);
    auto dead = wire;
    dead.amplitude = 0.0;
    EXPECT_THROW(normalize_to_power(dead, 1.0), Error);
}

TEST(Modes, TwoResolutionQuadrature)
{
    const Complex eps = silver_633();
    const auto coarse = solve_wire_spp(eps, 1.0, 164.0, 633.0, {2.0});
    const auto fine = solve_wire_spp(eps, 1.0, 164.0, 633.0, {1.0});
    EXPECT_NEAR(profile_power(coarse.profile) / profile_power(fine.profile), 1.0, 1e-3);
}

TEST(Modes, LossIsLinearInImaginaryIndex)
{
    auto m = solve_wire_spp(silver_633(), 1.0, 164.0, 633.0);
    const double l1 = propagation_loss_db_per_um(m);
    m.n_eff = Complex(m.n_eff.real(), 2.0 * m.n_eff.imag());
    EXPECT_NEAR(propagation_loss_db_per_um(m), 2.0 * l1, 1e-12 * l1);
    // 20 log10(e) Im(beta) per micrometre
    EXPECT_NEAR(l1, 20.0 / std::log(10.0) * 0.5 * m.beta().imag() * 1000.0, 1e-9);
}
