#pragma once

// Bessel functions of order 0 and 1 for the axisymmetric mode solvers.
//
// Modified functions I and K are evaluated for complex argument with
// Re z >= 0 and are returned exponentially scaled (I·e^{-z}, K·e^{z}) so that
// thick metal cores and far evanescent tails do not overflow. Small |z| uses
// the ascending series, larger |z| uses Steed's continued fraction for K
// (Thompson & Barnett) together with the I1/I0 continued fraction and the
// Wronskian I0·K1 + I1·K0 = 1/z.

#include <cmath>
#include <complex>
#include <limits>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/core/units.hpp"

namespace nc::special {

struct ScaledIK {
    Complex i0e;  // I0(z)·exp(-z)
    Complex i1e;  // I1(z)·exp(-z)
    Complex k0e;  // K0(z)·exp(z)
    Complex k1e;  // K1(z)·exp(z)
};

namespace detail {

inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double series_radius = 2.0;
inline constexpr int max_iterations = 100000;

inline ScaledIK ik_series(Complex z)
{
    const Complex q = 0.25 * z * z;
    const double eps = std::numeric_limits<double>::epsilon();

    // I0 and K0 share the term sequence t_k = q^k/(k!)^2.
    Complex t = 1.0;
    Complex i0 = 1.0;
    Complex k0_sum = 0.0;
    double harmonic = 0.0;
    for (int k = 1; k < 200; ++k) {
        t *= q / double(k * k);
        harmonic += 1.0 / k;
        i0 += t;
        k0_sum += t * harmonic;
        if (std::abs(t) < eps * std::abs(i0) && std::abs(t * harmonic) <= eps * std::abs(k0_sum)) break;
    }

    // I1 and K1 share u_k = q^k/(k!(k+1)!).
    Complex u = 1.0;
    Complex i1_sum = 1.0;
    double psi_k1 = -euler_gamma;        // psi(k+1)
    double psi_k2 = 1.0 - euler_gamma;   // psi(k+2)
    Complex k1_sum = psi_k1 + psi_k2;
    for (int k = 1; k < 200; ++k) {
        u *= q / double(k * (k + 1));
        psi_k1 += 1.0 / k;
        psi_k2 += 1.0 / (k + 1);
        i1_sum += u;
        const Complex term = u * (psi_k1 + psi_k2);
        k1_sum += term;
        if (std::abs(u) < eps * std::abs(i1_sum) && std::abs(term) <= eps * std::abs(k1_sum)) break;
    }
    const Complex i1 = 0.5 * z * i1_sum;

    const Complex log_half = std::log(0.5 * z);
    const Complex k0 = -(log_half + euler_gamma) * i0 + k0_sum;
    const Complex k1 = 1.0 / z + log_half * i1 - 0.25 * z * k1_sum;

    const Complex em = std::exp(-z);
    const Complex ep = std::exp(z);
    return {i0 * em, i1 * em, k0 * ep, k1 * ep};
}

// I1(z)/I0(z) by modified Lentz on 1/(2/z + 1/(4/z + ...)).
inline Complex i_ratio_cf(Complex z)
{
    const double tiny = 1e-300;
    const double eps = std::numeric_limits<double>::epsilon();
    Complex f = tiny;
    Complex c = f;
    Complex d = 0.0;
    for (int j = 1; j < max_iterations; ++j) {
        const Complex b = 2.0 * j / z;
        d = b + d;
        if (std::abs(d) < tiny) d = tiny;
        c = b + 1.0 / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const Complex delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < eps) return f;
    }
    throw Error(ErrorKind::Convergence, "I1/I0 continued fraction did not converge");
}

// Steed's CF2 for K0·e^z and K1·e^z.
inline void k_steed(Complex z, Complex& k0e, Complex& k1e)
{
    const double eps = std::numeric_limits<double>::epsilon();
    Complex b = 2.0 * (1.0 + z);
    Complex d = 1.0 / b;
    Complex h = d;
    Complex delh = d;
    Complex q1 = 0.0;
    Complex q2 = 1.0;
    const double a1 = 0.25;
    Complex q = a1;
    Complex c = a1;
    double a = -a1;
    Complex s = 1.0 + q * delh;
    int i = 2;
    for (; i < max_iterations; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / double(i);
        const Complex qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const Complex dels = q * delh;
        s += dels;
        if (std::abs(dels) < eps * std::abs(s)) break;
    }
    if (i >= max_iterations) throw Error(ErrorKind::Convergence, "K continued fraction did not converge");
    h = a1 * h;
    k0e = std::sqrt(pi / (2.0 * z)) / s;
    k1e = k0e * (z + 0.5 - h) / z;
}

}  // namespace detail

/// Scaled I0, I1, K0, K1 for Re z >= 0, z != 0.
inline ScaledIK bessel_ik_scaled(Complex z)
{
    if (z == Complex{0.0, 0.0}) throw Error(ErrorKind::Domain, "modified Bessel K is singular at z = 0");
    if (z.real() < -1e-14 * std::abs(z))
        throw Error(ErrorKind::Domain, "modified Bessel evaluation requires Re z >= 0");
    if (std::abs(z) <= detail::series_radius) return detail::ik_series(z);

    ScaledIK out;
    detail::k_steed(z, out.k0e, out.k1e);
    const Complex f = detail::i_ratio_cf(z);
    out.i0e = 1.0 / (z * (out.k1e + f * out.k0e));
    out.i1e = f * out.i0e;
    return out;
}

inline Complex bessel_i0(Complex z) { return bessel_ik_scaled(z).i0e * std::exp(z); }
inline Complex bessel_i1(Complex z) { return bessel_ik_scaled(z).i1e * std::exp(z); }
inline Complex bessel_k0(Complex z) { return bessel_ik_scaled(z).k0e * std::exp(-z); }
inline Complex bessel_k1(Complex z) { return bessel_ik_scaled(z).k1e * std::exp(-z); }

/// I1(z)/I0(z) without scaling artefacts; valid for any z with Re z >= 0.
inline Complex bessel_i_ratio(Complex z)
{
    if (std::abs(z) <= detail::series_radius) {
        const auto s = detail::ik_series(z);
        return s.i1e / s.i0e;
    }
    return detail::i_ratio_cf(z);
}

/// K1(z)/K0(z).
inline Complex bessel_k_ratio(Complex z)
{
    const auto s = bessel_ik_scaled(z);
    return s.k1e / s.k0e;
}

/// Real-argument J0, J1. The ascending series is used on |x| <= 8 where it
/// keeps ~1e-13 accuracy; beyond that the standard library is used.
inline double bessel_j0(double x)
{
    if (std::abs(x) > 8.0) return std::cyl_bessel_j(0.0, std::abs(x));
    const double q = -0.25 * x * x;
    double t = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 100; ++k) {
        t *= q / double(k * k);
        sum += t;
        if (std::abs(t) < 1e-18 * std::abs(sum) + 1e-300) break;
    }
    return sum;
}

inline double bessel_j1(double x)
{
    if (std::abs(x) > 8.0) {
        const double v = std::cyl_bessel_j(1.0, std::abs(x));
        return x < 0 ? -v : v;
    }
    const double q = -0.25 * x * x;
    double t = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 100; ++k) {
        t *= q / double(k * (k + 1));
        sum += t;
        if (std::abs(t) < 1e-18 * std::abs(sum) + 1e-300) break;
    }
    return 0.5 * x * sum;
}

}  // namespace nc::special
