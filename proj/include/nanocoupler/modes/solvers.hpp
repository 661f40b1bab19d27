#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/modes/guided_mode.hpp"

namespace nc::modes {

inline constexpr double tm01_cutoff_v = 2.404825557695773;  // first zero of J0
inline constexpr double j1_first_zero = 3.831705970207512;

/// Step-index TM dispersion function in pole-free form,
///   eps1 J1(u) w K0(w) + eps2 K1(w) u J0(u),
/// with exponentially scaled K so large fibres do not underflow.
inline double fiber_tm_residual(double n_eff, double core_index, double clad_index, double radius_nm,
                                double lambda_nm)
{
    const double ka = omega_internal(lambda_nm) * radius_nm;
    const double u = ka * std::sqrt(std::max(0.0, core_index * core_index - n_eff * n_eff));
    const double w = ka * std::sqrt(std::max(0.0, n_eff * n_eff - clad_index * clad_index));
    if (w == 0.0) return core_index * core_index * special::bessel_j1(u);  // w K0(w) -> 0, K1 w -> 1
    const auto k = special::bessel_ik_scaled(Complex(w, 0.0));
    const double e1 = core_index * core_index;
    const double e2 = clad_index * clad_index;
    return e1 * special::bessel_j1(u) * w * k.k0e.real() + e2 * k.k1e.real() * u * special::bessel_j0(u);
}

/// Ratio form eps1 J1/(u J0) + eps2 K1/(w K0); this is the quantity the
/// returned root is checked against.
inline double fiber_tm_ratio_residual(double n_eff, double core_index, double clad_index, double radius_nm,
                                      double lambda_nm)
{
    const double ka = omega_internal(lambda_nm) * radius_nm;
    const double u = ka * std::sqrt(core_index * core_index - n_eff * n_eff);
    const double w = ka * std::sqrt(n_eff * n_eff - clad_index * clad_index);
    return core_index * core_index * special::bessel_j1(u) / (u * special::bessel_j0(u)) +
           clad_index * clad_index * special::bessel_k_ratio(Complex(w, 0.0)).real() / w;
}

inline GuidedMode solve_fiber_tm01(double core_index, double clad_index, double radius_nm, double lambda_nm,
                                   const ProfileOptions& profile = {})
{
    if (!(clad_index >= 1.0) || !(core_index > clad_index))
        throw Error(ErrorKind::Domain, "fiber needs core_index > clad_index >= 1");
    if (!(radius_nm > 0.0) || !(lambda_nm > 0.0)) throw Error(ErrorKind::Domain, "radius and wavelength must be > 0");

    const double ka = omega_internal(lambda_nm) * radius_nm;
    const double v = ka * std::sqrt(core_index * core_index - clad_index * clad_index);
    if (v <= tm01_cutoff_v)
        throw Error(ErrorKind::NoMode, "TM01 below cutoff: V = " + std::to_string(v) + " <= " +
                                           std::to_string(tm01_cutoff_v),
                    {v});

    // The TM01 root has u in (2.405, min(V, 3.832)); scan u there for the
    // first sign change of the pole-free residual and then bracket-solve.
    auto n_of_u = [&](double u) { return std::sqrt(core_index * core_index - (u / ka) * (u / ka)); };
    auto g = [&](double n) { return fiber_tm_residual(n, core_index, clad_index, radius_nm, lambda_nm); };
    const double u_lo = tm01_cutoff_v;
    const double u_hi = std::min(v, j1_first_zero);
    const int scan = 4000;
    double n_prev = n_of_u(u_lo);
    double g_prev = g(n_prev);
    double a = 0.0, b = 0.0;
    bool found = false;
    for (int i = 1; i <= scan && !found; ++i) {
        const double u = u_lo + (u_hi - u_lo) * i / scan;
        const double n = n_of_u(u);
        const double gn = g(n);
        if ((gn <= 0.0) != (g_prev <= 0.0)) {
            a = n;
            b = n_prev;
            found = true;
        }
        n_prev = n;
        g_prev = gn;
    }
    if (!found) throw Error(ErrorKind::NoMode, "no TM01 root found above cutoff", {v});

    boost::uintmax_t iters = 200;
    const auto br = boost::math::tools::toms748_solve(g, a, b, boost::math::tools::eps_tolerance<double>(52), iters);
    const double n = 0.5 * (br.first + br.second);

    GuidedMode m;
    m.kind = ModeKind::FiberTM01;
    m.lambda_vac_nm = lambda_nm;
    m.radius_nm = radius_nm;
    m.n_eff = n;
    m.eps_core = core_index * core_index;
    m.eps_clad = clad_index * clad_index;
    m.profile = sample_profile(m, profile);
    m.power_norm_w = mode_power(m);
    return m;
}

/// Wire TM0 dispersion function eps_m I1(xm)/(xm I0(xm)) + eps_d K1(xd)/(xd K0(xd))
/// with x = q·radius.
inline Complex wire_tm_residual(Complex n_eff, Complex metal_eps, double clad_index, double radius_nm,
                                double lambda_nm)
{
    const double k = omega_internal(lambda_nm);
    const Complex b2 = n_eff * n_eff * k * k;
    const double ed = clad_index * clad_index;
    const Complex xm = std::sqrt(b2 - k * k * metal_eps) * radius_nm;
    const Complex xd = std::sqrt(b2 - k * k * ed) * radius_nm;
    return metal_eps * special::bessel_i_ratio(xm) / xm + ed * special::bessel_k_ratio(xd) / xd;
}

inline Complex planar_spp_index(Complex metal_eps, double clad_index)
{
    const double ed = clad_index * clad_index;
    return std::sqrt(metal_eps * ed / (metal_eps + ed));
}

namespace detail {

// Newton iteration in complex n_eff; returns false when the iterate leaves
// the bound SPP branch or stalls.
inline bool wire_newton(Complex& n, Complex metal_eps, double clad_index, double radius_nm, double lambda_nm,
                        std::vector<double>& trace)
{
    auto f = [&](Complex x) { return wire_tm_residual(x, metal_eps, clad_index, radius_nm, lambda_nm); };
    for (int it = 0; it < 60; ++it) {
        const Complex fx = f(n);
        trace.push_back(n.real());
        trace.push_back(n.imag());
        if (std::abs(fx) < 1e-14) return true;
        const double h = 1e-6 * std::abs(n);
        const Complex df = (f(n + h) - f(n - h)) / (2.0 * h);
        if (df == Complex(0.0, 0.0) || !std::isfinite(std::abs(df))) return false;
        Complex step = fx / df;
        const double cap = 0.25 * std::abs(n);
        if (std::abs(step) > cap) step *= cap / std::abs(step);
        n -= step;
        if (!(n.real() > clad_index) || !std::isfinite(std::abs(n))) return false;
        if (std::abs(step) < 1e-15 * std::abs(n)) return std::abs(f(n)) < 1e-10;
    }
    return std::abs(f(n)) < 1e-10;
}

}  // namespace detail

inline GuidedMode solve_wire_spp(Complex metal_eps, double clad_index, double radius_nm, double lambda_nm,
                                 const ProfileOptions& profile = {})
{
    if (!(clad_index >= 1.0)) throw Error(ErrorKind::Domain, "cladding index must be >= 1");
    if (!(radius_nm > 0.0) || !(lambda_nm > 0.0)) throw Error(ErrorKind::Domain, "radius and wavelength must be > 0");
    if (!(metal_eps.real() < -clad_index * clad_index))
        throw Error(ErrorKind::NoMode, "no SPP: Re eps_metal must be below -clad_index^2");

    // Continuation in radius from the quasi-planar limit at 20 wavelengths.
    std::vector<double> trace;
    Complex n = planar_spp_index(metal_eps, clad_index);
    double r = std::max(20.0 * lambda_nm, radius_nm);
    if (!detail::wire_newton(n, metal_eps, clad_index, r, lambda_nm, trace))
        throw Error(ErrorKind::Branch, "SPP root search failed in the planar limit", trace);
    double factor = 0.8;
    while (r > radius_nm) {
        const double next = std::max(radius_nm, r * factor);
        Complex trial = n;
        if (detail::wire_newton(trial, metal_eps, clad_index, next, lambda_nm, trace) &&
            std::abs(trial - n) < 0.2 * std::abs(n)) {
            n = trial;
            r = next;
            factor = std::max(0.5, factor * factor);
        } else {
            factor = std::sqrt(factor);
            if (factor > 0.999)
                throw Error(ErrorKind::Branch, "SPP root search left the bound branch", trace);
        }
    }

    GuidedMode m;
    m.kind = ModeKind::WireSPP0;
    m.lambda_vac_nm = lambda_nm;
    m.radius_nm = radius_nm;
    m.n_eff = n;
    m.eps_core = metal_eps;
    m.eps_clad = clad_index * clad_index;
    if (!(n.imag() >= 0.0) || !(m.q_clad().real() > 0.0))
        throw Error(ErrorKind::Branch, "SPP root is not a bound passive mode", trace);
    m.profile = sample_profile(m, profile);
    m.power_norm_w = mode_power(m);
    return m;
}

}  // namespace nc::modes
