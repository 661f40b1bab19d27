#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/core/units.hpp"
#include "nanocoupler/special/bessel.hpp"

namespace nc::modes {

enum class ModeKind { FiberTM01, WireSPP0 };

inline std::string to_string(ModeKind k) { return k == ModeKind::FiberTM01 ? "fiber_tm01" : "wire_spp0"; }

struct FieldSample {
    Complex er;
    Complex ez;
    Complex hphi;  // scaled by eta0, same units as E
};

/// Uniform radial samples plus both one-sided limits at the core interface,
/// where Er jumps with the permittivity ratio.
struct ModeProfile {
    double step_nm = 0.0;
    double interface_nm = 0.0;
    std::vector<double> r;
    std::vector<Complex> er, ez, hphi;
    FieldSample inner_limit;
    FieldSample outer_limit;

    std::size_t size() const { return r.size(); }
    double extent() const { return r.empty() ? 0.0 : r.back(); }

    /// Piecewise-linear value on one side of the interface; `inside` selects
    /// the limit used exactly at r = interface.
    FieldSample at(double x, bool inside) const;

    void scale(Complex s)
    {
        for (auto* v : {&er, &ez, &hphi})
            for (auto& e : *v) e *= s;
        for (auto* f : {&inner_limit, &outer_limit}) {
            f->er *= s;
            f->ez *= s;
            f->hphi *= s;
        }
    }
};

inline FieldSample ModeProfile::at(double x, bool inside) const
{
    if (r.empty() || x < 0.0 || x > extent()) return {};
    const auto k = static_cast<std::size_t>(std::min(std::floor(x / step_nm), double(r.size() - 1)));
    auto sample = [&](std::size_t i) { return FieldSample{er[i], ez[i], hphi[i]}; };
    const std::size_t k1 = std::min(k + 1, r.size() - 1);
    FieldSample lo = sample(k), hi = sample(k1);
    double xlo = r[k], xhi = r[k1];
    // Replace the endpoint that lies across the interface by the matching limit.
    if (inside && xhi >= interface_nm && x <= interface_nm) {
        hi = inner_limit;
        xhi = interface_nm;
        if (xlo >= interface_nm) return inner_limit;
    } else if (!inside && xlo <= interface_nm && x >= interface_nm) {
        lo = outer_limit;
        xlo = interface_nm;
    }
    if (xhi <= xlo) return lo;
    const double t = std::clamp((x - xlo) / (xhi - xlo), 0.0, 1.0);
    return {(1.0 - t) * lo.er + t * hi.er, (1.0 - t) * lo.ez + t * hi.ez, (1.0 - t) * lo.hphi + t * hi.hphi};
}

/// One axisymmetric TM guided mode with fields ~ exp(i(beta z - omega t)).
/// The analytic fields are parametrised by Hphi at r = radius (`amplitude`).
struct GuidedMode {
    ModeKind kind = ModeKind::FiberTM01;
    double lambda_vac_nm = 0.0;
    double radius_nm = 0.0;
    Complex n_eff;
    Complex eps_core;
    Complex eps_clad;
    Complex amplitude{1.0, 0.0};
    double power_norm_w = 0.0;
    ModeProfile profile;

    double k0() const { return omega_internal(lambda_vac_nm); }
    Complex beta() const { return n_eff * k0(); }

    /// Transverse decay constant q = sqrt(beta^2 - k0^2 eps), principal branch.
    Complex q_core() const { return std::sqrt(beta() * beta() - k0() * k0() * eps_core); }
    Complex q_clad() const { return std::sqrt(beta() * beta() - k0() * k0() * eps_clad); }

    FieldSample field(double r) const;
};

inline FieldSample GuidedMode::field(double r) const
{
    const double w = k0();
    const double a = radius_nm;
    const Complex b = beta();
    FieldSample f;
    if (r < a) {
        if (kind == ModeKind::FiberTM01) {
            const double kappa = std::sqrt(std::max(0.0, (w * w * eps_core - b * b).real()));
            const double j1a = special::bessel_j1(kappa * a);
            f.hphi = amplitude * special::bessel_j1(kappa * r) / j1a;
            f.ez = I * kappa * amplitude * special::bessel_j0(kappa * r) / (w * eps_core * j1a);
        } else {
            const Complex q = q_core();
            const auto in = r > 0.0 ? special::bessel_ik_scaled(q * r) : special::ScaledIK{1.0, 0.0, 0.0, 0.0};
            const auto at = special::bessel_ik_scaled(q * a);
            const Complex decay = std::exp(q * (r - a));
            f.hphi = amplitude * in.i1e / at.i1e * decay;
            f.ez = I * q * amplitude * in.i0e / (w * eps_core * at.i1e) * decay;
        }
        f.er = b * f.hphi / (w * eps_core);
    } else {
        const Complex q = q_clad();
        const auto out = special::bessel_ik_scaled(q * r);
        const auto at = special::bessel_ik_scaled(q * a);
        const Complex decay = std::exp(-q * (r - a));
        f.hphi = amplitude * out.k1e / at.k1e * decay;
        f.ez = -I * q * amplitude * out.k0e / (w * eps_clad * at.k1e) * decay;
        f.er = b * f.hphi / (w * eps_clad);
    }
    return f;
}

namespace detail {

/// Integrates f(r) over [0, inf) for a mode-like integrand with kinks at the
/// given breakpoints and exponential decay beyond the last one.
template <class F>
Complex radial_integral(F f, std::vector<double> breaks, double decay_length_nm)
{
    using Gauss = boost::math::quadrature::gauss<double, 20>;
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    Complex total = 0.0;
    double lo = 0.0;
    const double panel = std::max(decay_length_nm, 1.0);
    for (double hi : breaks) {
        if (hi <= lo) continue;
        const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel)));
        for (int k = 0; k < n; ++k)
            total += Gauss::integrate(f, lo + (hi - lo) * k / n, lo + (hi - lo) * (k + 1) / n);
        lo = hi;
    }
    // Tail: panels of one decay length until e^{-40} is reached.
    for (int k = 0; k < 40; ++k) total += Gauss::integrate(f, lo + k * panel, lo + (k + 1) * panel);
    return total;
}

inline double tail_decay_length(const GuidedMode& m)
{
    // Power density decays as exp(-2 Re q r).
    return 1.0 / (2.0 * m.q_clad().real());
}

}  // namespace detail

/// Axial Poynting flux 1/2 Re ∫ Er Hphi* 2 pi r dr in watts, by quadrature of
/// the analytic fields.
inline double mode_power(const GuidedMode& m)
{
    const double a = m.radius_nm;
    const double inner = m.kind == ModeKind::WireSPP0 ? std::min(a, 1.0 / m.q_core().real()) : a;
    auto f = [&](double r) -> Complex {
        const auto s = m.field(r);
        return 0.5 * s.er * std::conj(s.hphi) * 2.0 * pi * r;
    };
    const Complex p = detail::radial_integral(f, {std::max(0.0, a - 4.0 * inner), a},
                                              detail::tail_decay_length(m));
    return p.real() * watts_per_internal_power;
}

/// Piecewise trapezoid rule for ∫ f(fields, r) dr over a sampled profile,
/// split at the interface so the Er jump is not smeared.
template <class F>
Complex profile_integral(const ModeProfile& p, F f)
{
    std::vector<std::pair<double, FieldSample>> pts;
    const double a = p.interface_nm;
    for (std::size_t i = 0; i < p.size() && p.r[i] < a; ++i) pts.push_back({p.r[i], {p.er[i], p.ez[i], p.hphi[i]}});
    pts.push_back({a, p.inner_limit});
    Complex s = 0.0;
    auto sweep = [&]() {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            s += 0.5 * (f(pts[i].second, pts[i].first) + f(pts[i + 1].second, pts[i + 1].first)) *
                 (pts[i + 1].first - pts[i].first);
    };
    sweep();
    pts.clear();
    pts.push_back({a, p.outer_limit});
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.r[i] > a) pts.push_back({p.r[i], {p.er[i], p.ez[i], p.hphi[i]}});
    sweep();
    return s;
}

/// Same flux recomputed from the sampled profile.
inline double profile_power(const ModeProfile& p)
{
    const Complex s =
        profile_integral(p, [](const FieldSample& v, double r) { return v.er * std::conj(v.hphi) * r; });
    return 0.5 * 2.0 * pi * s.real() * watts_per_internal_power;
}

struct ProfileOptions {
    double step_nm = 2.0;
    double min_extent_wavelengths = 4.0;
    double cutoff_fraction = 1e-4;
    double max_extent_wavelengths = 60.0;
};

/// Uniform radial sampling from the axis until |fields| fall below
/// cutoff_fraction of the peak, but at least min_extent_wavelengths.
inline ModeProfile sample_profile(const GuidedMode& m, const ProfileOptions& opt = {})
{
    if (!(opt.step_nm > 0.0)) throw Error(ErrorKind::Domain, "profile step must be positive");
    ModeProfile p;
    p.step_nm = opt.step_nm;
    p.interface_nm = m.radius_nm;
    p.inner_limit = m.field(std::nextafter(m.radius_nm, 0.0));
    p.outer_limit = m.field(m.radius_nm);
    const double peak = std::abs(m.field(m.radius_nm).hphi);
    const double min_r = std::max(opt.min_extent_wavelengths * m.lambda_vac_nm, 1.5 * m.radius_nm);
    const double max_r = std::max(opt.max_extent_wavelengths * m.lambda_vac_nm, 2.0 * min_r);
    for (std::size_t i = 0;; ++i) {
        const double r = static_cast<double>(i) * opt.step_nm;
        const auto s = m.field(r);
        p.r.push_back(r);
        p.er.push_back(s.er);
        p.ez.push_back(s.ez);
        p.hphi.push_back(s.hphi);
        const double mag = std::max({std::abs(s.er), std::abs(s.ez), std::abs(s.hphi)});
        if (r >= min_r && r > m.radius_nm && mag < opt.cutoff_fraction * peak) break;
        if (r >= max_r) break;
    }
    return p;
}

/// Rescales fields so the carried axial flux equals `watts`.
inline GuidedMode normalize_to_power(GuidedMode m, double watts)
{
    if (!(watts > 0.0)) throw Error(ErrorKind::Domain, "target power must be positive");
    const double p = mode_power(m);
    if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorKind::Degenerate, "mode carries no power");
    const double s = std::sqrt(watts / p);
    m.amplitude *= s;
    m.profile.scale(s);
    m.power_norm_w = mode_power(m);
    return m;
}

/// Power attenuation in dB per micrometre: 20 log10(e) Im(beta) per um.
inline double propagation_loss_db_per_um(const GuidedMode& m)
{
    return std::max(0.0, 2.0 * db_per_neper_power * m.beta().imag() * 1000.0);
}

}  // namespace nc::modes
