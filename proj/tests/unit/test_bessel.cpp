#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "nanocoupler/special/bessel.hpp"

using nc::Complex;
namespace sp = nc::special;

namespace {

struct IkRef {
    Complex z;
    Complex i0e, i1e, k0e, k1e;
};

// 40-digit reference values (exponentially scaled), computed offline with an
// arbitrary-precision series/asymptotic implementation.
const std::vector<IkRef> kIkRefs = {
    {{0.1, 0.0}, {0.90710092578230109165, 0.0}, {0.045298446808809327277, 0.0}, {2.6823261022628943375, 0.0}, {10.890182683049696015, 0.0}},
    {{0.05, 0.01}, {0.95175502203817876494, -0.0092799768852618561743}, {0.023833691110892541596, 0.0045224404523598579004}, {3.2551227257588951132, -0.17402296166825510391}, {20.160840279876469121, -3.855651001124631886}},
    {{1.0, 0.5}, {0.42918773313737024713, -0.11972104707562427752}, {0.2252656027719279458, 0.019153487279429828807}, {1.073351374548216683, -0.2194622552838002385}, {1.4214312056252420637, -0.46820045606671151211}},
    {{1.9, 0.3}, {0.31428217662820081145, -0.029990798211885084293}, {0.21760089827375369686, -0.0039514576370646481125}, {0.85481527623206916461, -0.060994914612007110135}, {1.0528159423401985169, -0.10454291869601989451}},
    {{0.3, 1.5}, {0.1521867159751985926, -0.37402514437776520348}, {0.4280019069154003882, -0.0010712033712874815768}, {0.79979350549171978799, -0.57267883679386854343}, {0.70694785660905690302, -0.85845200322143771212}},
    {{2.1, 0.0}, {0.29956309452628190874, 0.0}, {0.21374767210633227218, 0.0}, {0.82301715253166205755, 0.0}, {1.0023680527405790625, 0.0}},
    {{3.0, 2.0}, {0.20501840754977675132, -0.068120589994214739192}, {0.18799604512902068232, -0.041535341537625532421}, {0.61779055481720455262, -0.17643402180420354425}, {0.67438836455099449305, -0.23938036167479997497}},
    {{6.7, 0.2}, {0.15723482200396496042, -0.0024515810907807302886}, {0.14499208636106228684, -0.0018753935742247987373}, {0.47567645684909470024, -0.0068657037766344869868}, {0.50996903130040055366, -0.0083542885707322321376}},
    {{10.0, 0.0}, {0.12783333716342860732, 0.0}, {0.12126268138445551872, 0.0}, {0.39163193443659866573, 0.0}, {0.41076657059578875113, 0.0}},
    {{0.0, 3.0}, {0.25744948407919153411, 0.036698533971745074075}, {0.047848002959950339266, -0.3356658248458387271}, {0.52838470133236104785, -0.48793734347006880603}, {0.45529180836537132482, -0.58005306050827664315}},
    {{25.0, 1.0}, {0.080147694105209930677, -0.0016190065765462818029}, {0.078531990576474939797, -0.0015209645733103267266}, {0.24928995089048961017, -0.0049358822981901943938}, {0.25421615981896094578, -0.0052288542248107046872}},
    {{60.0, 5.0}, {0.051476685883392781043, -0.0021501928672491117499}, {0.051050387517209388138, -0.0020965213171666558458}, {0.16105319757941245278, -0.0066715731866236324343}, {0.16237609794675346198, -0.0068367369173356506003}},
    {{500.0, 10.0}, {0.017843027741991392621, -0.00017850180521212680121}, {0.017825186492122134925, -0.00017796620994002237919}, {0.05602752085816689563, -0.00055993969682819741585}, {0.056083486869370963617, -0.00056161811962641907236}},
    {{4.0, -1.0}, {0.20141736362492889429, 0.026938664929447588713}, {0.17695361868647469848, 0.016379477780552682582}, {0.59689516788917561217, 0.069814490989645746882}, {0.66199485110132481232, 0.093634002731332863351}},
};

struct JRef {
    double x, j0, j1;
};

const std::vector<JRef> kJRefs = {
    {0.0, 1.0, 0.0},
    {0.5, 0.93846980724081290423, 0.24226845767487388638},
    {2.4048, 0.000013268284301171567712, 0.5191530145075532409},
    {3.8, -0.40255641017856416704, 0.012821002926731699137},
    {7.5, 0.26633965788037839687, 0.13524842757970550518},
    {11.9, 0.02504944169958964508, -0.22898324966192405505},
    {15.0, -0.014224472826780773234, 0.20510403861352276115},
};

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Bessel, ScaledIKMatchesHighPrecisionReference)
{
    for (const auto& r : kIkRefs) {
        const auto v = sp::bessel_ik_scaled(r.z);
        EXPECT_LT(rel(v.i0e, r.i0e), 1e-12) << "I0 at " << r.z;
        EXPECT_LT(rel(v.i1e, r.i1e), 1e-12) << "I1 at " << r.z;
        EXPECT_LT(rel(v.k0e, r.k0e), 1e-12) << "K0 at " << r.z;
        EXPECT_LT(rel(v.k1e, r.k1e), 1e-12) << "K1 at " << r.z;
    }
}

TEST(Bessel, RealJMatchesReference)
{
    for (const auto& r : kJRefs) {
        EXPECT_NEAR(sp::bessel_j0(r.x), r.j0, 1e-13) << r.x;
        EXPECT_NEAR(sp::bessel_j1(r.x), r.j1, 1e-13) << r.x;
    }
}

TEST(Bessel, WronskianHoldsAcrossSeriesBoundary)
{
    for (double mag : {0.5, 1.99, 2.01, 5.0, 40.0, 300.0}) {
        for (double arg : {-1.2, -0.4, 0.0, 0.7, 1.5}) {
            const Complex z = std::polar(mag, arg);
            const auto v = sp::bessel_ik_scaled(z);
            const Complex w = z * (v.i0e * v.k1e + v.i1e * v.k0e);
            EXPECT_LT(std::abs(w - 1.0), 1e-12) << z;
        }
    }
}

TEST(Bessel, AgreesWithStandardLibraryOnRealAxis)
{
    for (double x : {0.3, 1.0, 2.5, 7.0, 20.0, 80.0}) {
        const auto v = sp::bessel_ik_scaled(Complex{x, 0.0});
        EXPECT_NEAR(v.k0e.real(), std::cyl_bessel_k(0.0, x) * std::exp(x), 1e-12 * v.k0e.real());
        EXPECT_NEAR(v.k1e.real(), std::cyl_bessel_k(1.0, x) * std::exp(x), 1e-12 * v.k1e.real());
        EXPECT_NEAR(v.i0e.real(), std::cyl_bessel_i(0.0, x) * std::exp(-x), 1e-12 * v.i0e.real());
    }
}

TEST(Bessel, RejectsLeftHalfPlaneAndZero)
{
    EXPECT_THROW(sp::bessel_ik_scaled(Complex{-1.0, 0.2}), nc::Error);
    EXPECT_THROW(sp::bessel_ik_scaled(Complex{0.0, 0.0}), nc::Error);
}
