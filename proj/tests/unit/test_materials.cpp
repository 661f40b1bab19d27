#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nanocoupler/materials/fit.hpp"
#include "nanocoupler/materials/library.hpp"

using namespace nc;
using namespace nc::materials;

namespace {

MaterialLibrary& lib()
{
    static MaterialLibrary l;
    return l;
}

// Coarse brute-force minimiser over the four Drude parameters, used as an
// independent check that the damped least-squares fit reaches a minimum.
double grid_search_cost(const std::vector<FitSample>& samples, double wp0, double g0)
{
    double best = 1e300;
    for (double einf = 1.0; einf <= 8.0; einf += 0.25) {
        for (double wp = 0.85 * wp0; wp <= 1.15 * wp0; wp += 0.005 * wp0) {
            for (double g = 0.0; g <= 3.0 * g0; g += 0.1 * g0) {
                for (double s = 0.0; s <= 0.5; s += 0.025) {
                    double c = 0.0;
                    for (const auto& smp : samples) {
                        const double w = rad_per_s_to_ev(omega_si(smp.wavelength_nm));
                        const Complex e = einf - wp * wp / Complex(w * w, g * w) + I * s / w;
                        c += std::norm(e - smp.eps);
                    }
                    best = std::min(best, c);
                }
            }
        }
    }
    return best;
}

}  // namespace

TEST(Permittivity, DrudeZeroCrossingAtPlasmaFrequency)
{
    const double lambda = 500.0;
    DrudeParams p{1.0, omega_si(lambda), 0.0, 0.0};
    const auto m = MaterialModel::drude(p, std::nullopt, "ideal");
    EXPECT_LT(std::abs(eval_permittivity(m, lambda)), 1e-12);
}

TEST(Permittivity, VacuumAndDielectric)
{
    EXPECT_EQ(eval_permittivity(MaterialModel::vacuum(), 633.0), Complex(1.0, 0.0));
    EXPECT_NEAR(eval_permittivity(MaterialModel::dielectric(1.45), 633.0).real(), 2.1025, 1e-14);
}

TEST(Permittivity, RejectsNonPositiveWavelength)
{
    EXPECT_THROW(eval_permittivity(MaterialModel::vacuum(), 0.0), Error);
    EXPECT_THROW(eval_permittivity(MaterialModel::vacuum(), -5.0), Error);
}

TEST(Permittivity, InvalidParamsRejected)
{
    EXPECT_THROW(MaterialModel::dielectric(0.9), Error);
    EXPECT_THROW(MaterialModel::drude(DrudeParams{0.5, 1e16, 0, 0}, std::nullopt, "x"), Error);
    EXPECT_THROW(MaterialModel::drude(DrudeParams{1.0, 1e16, -1.0, 0}, std::nullopt, "x"), Error);
}

TEST(Tabulated, ParsesCommentsAndRejectsBadTables)
{
    std::istringstream good("# source: test table\n700 -20 1.0 # trailing\n\n600 -15 0.8\n");
    const auto t = TabulatedOptics::parse(good, "fallback");
    EXPECT_EQ(t.label(), "test table");
    ASSERT_EQ(t.entries().size(), 2u);
    EXPECT_DOUBLE_EQ(t.entries()[0].wavelength_nm, 600.0);
    EXPECT_NEAR(t.interpolate(650.0).real(), -17.5, 1e-12);

    std::istringstream active("600 -15 -0.1\n700 -20 1\n");
    EXPECT_THROW(TabulatedOptics::parse(active, "x"), Error);
    std::istringstream dup("600 -15 0.1\n600 -20 1\n");
    EXPECT_THROW(TabulatedOptics::parse(dup, "x"), Error);
    std::istringstream one("600 -15 0.1\n");
    EXPECT_THROW(TabulatedOptics::parse(one, "x"), Error);
}

TEST(DrudeFit, RoundTripOnSyntheticData)
{
    const DrudeParams truth{3.7, ev_to_rad_per_s(9.0), ev_to_rad_per_s(0.045), 2.0e5};
    std::vector<OpticsSample> rows;
    for (double l = 550.0; l <= 720.0; l += 5.0) {
        const Complex e = truth.at_omega(omega_si(l));
        rows.push_back({l, e.real(), e.imag()});
    }
    const TabulatedOptics t(rows, "synthetic");
    const auto rep = fit_drude(t, 633.0);
    EXPECT_NEAR(rep.params.eps_inf / truth.eps_inf, 1.0, 1e-3);
    EXPECT_NEAR(rep.params.omega_p / truth.omega_p, 1.0, 1e-3);
    EXPECT_NEAR(rep.params.gamma / truth.gamma, 1.0, 1e-3);
    EXPECT_NEAR(rep.params.sigma / truth.sigma, 1.0, 1e-3);
    EXPECT_LT(rep.max_rel_residual, 1e-8);
}

TEST(DrudeFit, SilverAt633WithinTwoPercentAndAtGridSearchMinimum)
{
    for (const std::string ds : {"rakic", "jc"}) {
        const auto& t = lib().table("ag", ds);
        const auto rep = fit_drude(t, 633.0);
        EXPECT_LE(rep.max_rel_residual, 0.02) << ds;
        EXPECT_DOUBLE_EQ(rep.window.hi_nm - rep.window.lo_nm, 100.0);
        const double wp = rad_per_s_to_ev(rep.params.omega_p);
        const double g = std::max(rad_per_s_to_ev(rep.params.gamma), 0.01);
        EXPECT_LE(rep.cost, grid_search_cost(rep.samples, wp, g) * (1.0 + 1e-9)) << ds;

        // Fitted model reproduces the interpolated table at the centre.
        const auto m = MaterialModel::drude(rep.params, rep.window, t.label());
        const Complex fit = eval_permittivity(m, 633.0);
        const Complex tab = t.interpolate(633.0);
        EXPECT_LE(std::abs(fit - tab) / std::abs(tab), 0.02) << ds;
    }
}

TEST(DrudeFit, WindowOutsideTableIsCoverageError)
{
    const auto& t = lib().table("ag", "rakic");
    try {
        fit_drude(t, 2500.0);
        FAIL() << "expected coverage error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Coverage);
    }
    EXPECT_THROW(fit_drude(t, 320.0), Error);  // lower edge at 270 nm
}

TEST(DrudeFit, FittedMetalsArePassiveAndSmooth)
{
    const std::vector<std::tuple<std::string, std::string, double>> cases = {
        {"ag", "rakic", 633.0}, {"ag", "jc", 633.0}, {"au", "rakic", 1550.0}, {"au", "jc", 1550.0},
        {"al", "rakic", 266.0}};
    for (const auto& [metal, ds, lam] : cases) {
        const auto m = lib().metal(metal, ds, lam);
        for (double l = lam - 50.0; l <= lam + 50.0; l += 2.0)
            EXPECT_GE(eval_permittivity(m, l).imag(), 0.0) << metal << " " << l;

        // Central finite difference in omega against the analytic derivative.
        const auto* p = m.drude_params();
        ASSERT_NE(p, nullptr);
        const double w = omega_si(lam);
        const double h = w * 1e-5;
        const Complex fd = (p->at_omega(w + h) - p->at_omega(w - h)) / (2.0 * h);
        const Complex an = p->derivative_omega(w);
        EXPECT_LT(std::abs(fd - an) / std::abs(an), 1e-6) << metal;
    }
}
