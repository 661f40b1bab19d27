#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/materials/material.hpp"
#include "nanocoupler/materials/tabulated.hpp"

namespace nc::materials {

struct FitSample {
    double wavelength_nm;
    Complex eps;
};

struct FitReport {
    DrudeParams params;
    FitWindow window;
    std::vector<FitSample> samples;
    double max_rel_residual = 0.0;   // max_i |eps_fit - eps_tab| / |eps_tab|
    double cost = 0.0;               // sum_i |eps_fit - eps_tab|^2
    int iterations = 0;
    std::vector<double> cost_trace;
};

struct FitOptions {
    double window_nm = 100.0;
    int min_samples = 8;          // resample uniformly below this count
    int resample_points = 11;
    int max_iterations = 2000;
    double tolerance = 1e-15;     // relative cost decrease that counts as converged
    int creep_window = 50;
    double creep_gain = 1e-6;
};

namespace detail {

// Parameters in eV units: {eps_inf, wp, gamma, s} with s = sigma/eps0 as a rate.
using FitVector = std::array<double, 4>;

inline Complex drude_ev(const FitVector& p, double w)
{
    return p[0] - p[1] * p[1] / Complex(w * w, p[2] * w) + I * p[3] / w;
}

inline std::array<Complex, 4> drude_ev_jacobian(const FitVector& p, double w)
{
    const Complex den = Complex(w * w, p[2] * w);
    return {Complex(1.0, 0.0), -2.0 * p[1] / den, p[1] * p[1] * I * w / (den * den), I / w};
}

inline bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4>& b)
{
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-300) return false;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < 4; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    for (int c = 3; c >= 0; --c) {
        double s = b[c];
        for (int k = c + 1; k < 4; ++k) s -= a[c][k] * b[k];
        b[c] = s / a[c][c];
    }
    return true;
}

inline bool at_lower_bound(const FitVector& p, int a)
{
    switch (a) {
    case 0: return p[0] <= 1.0;
    case 2: return p[2] <= 0.0;
    case 3: return p[3] <= 0.0;
    default: return false;
    }
}

inline void project(FitVector& p)
{
    p[0] = std::max(p[0], 1.0);
    p[1] = std::max(std::abs(p[1]), 1e-6);
    p[2] = std::max(p[2], 0.0);
    p[3] = std::max(p[3], 0.0);
}

}  // namespace detail

/// Samples used by the fitter for a 100 nm window: the tabulated entries in
/// the window, or a uniform interpolated set when the table is sparse there.
inline std::vector<FitSample> fit_window_samples(const TabulatedOptics& data, double center_nm,
                                                 const FitOptions& opt = {})
{
    const double lo = center_nm - 0.5 * opt.window_nm;
    const double hi = center_nm + 0.5 * opt.window_nm;
    if (!(lo > 0.0) || !data.covers(lo, hi))
        throw Error(ErrorKind::Coverage, "table '" + data.label() + "' does not cover [" + std::to_string(lo) +
                                             ", " + std::to_string(hi) + "] nm");
    std::vector<FitSample> out;
    for (const auto& e : data.entries())
        if (e.wavelength_nm >= lo && e.wavelength_nm <= hi) out.push_back({e.wavelength_nm, e.eps()});
    if (static_cast<int>(out.size()) < opt.min_samples) {
        out.clear();
        for (int i = 0; i < opt.resample_points; ++i) {
            const double l = lo + (hi - lo) * i / (opt.resample_points - 1);
            out.push_back({l, data.interpolate(l)});
        }
    }
    return out;
}

/// Damped least-squares (Levenberg–Marquardt) fit of a Drude-with-conductivity
/// model to samples; minimises sum |eps_model - eps_sample|^2.
inline FitReport fit_drude_samples(std::vector<FitSample> samples, FitWindow window, const FitOptions& opt = {})
{
    using detail::FitVector;
    if (samples.size() < 4) throw Error(ErrorKind::Coverage, "need at least 4 samples to fit 4 Drude parameters");

    std::vector<double> w(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) w[i] = rad_per_s_to_ev(omega_si(samples[i].wavelength_nm));

    // Initial guess from the centre sample.
    const std::size_t mid = samples.size() / 2;
    const double wc = w[mid];
    const Complex ec = samples[mid].eps;
    FitVector p{1.0, wc * std::sqrt(std::max(1.0 - ec.real(), 1e-6)), 0.0, 0.0};
    p[2] = std::max(ec.imag(), 0.0) * wc * wc * wc / (p[1] * p[1]);

    auto cost_of = [&](const FitVector& q) {
        double c = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) c += std::norm(detail::drude_ev(q, w[i]) - samples[i].eps);
        return c;
    };

    FitReport rep;
    rep.window = window;
    double cost = cost_of(p);
    double lambda = 1e-3;
    rep.cost_trace.push_back(cost);
    int it = 0;
    int stalls = 0;
    for (; it < opt.max_iterations; ++it) {
        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const Complex r = detail::drude_ev(p, w[i]) - samples[i].eps;
            const auto jac = detail::drude_ev_jacobian(p, w[i]);
            for (int a = 0; a < 4; ++a) {
                jtr[a] += jac[a].real() * r.real() + jac[a].imag() * r.imag();
                for (int b = 0; b < 4; ++b)
                    jtj[a][b] += jac[a].real() * jac[b].real() + jac[a].imag() * jac[b].imag();
            }
        }
        bool improved = false;
        for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
            auto m = jtj;
            std::array<double, 4> rhs{};
            for (int a = 0; a < 4; ++a) {
                m[a][a] += lambda * std::max(jtj[a][a], 1e-30);
                rhs[a] = -jtr[a];
            }
            // Active set: a parameter sitting on its bound with the descent
            // direction pointing outward is frozen for this step.
            for (int a = 0; a < 4; ++a) {
                if (detail::at_lower_bound(p, a) && jtr[a] > 0.0) {
                    for (int b = 0; b < 4; ++b) m[a][b] = m[b][a] = 0.0;
                    m[a][a] = 1.0;
                    rhs[a] = 0.0;
                }
            }
            if (!detail::solve4(m, rhs)) {
                lambda *= 10.0;
                continue;
            }
            FitVector trial = p;
            for (int a = 0; a < 4; ++a) trial[a] += rhs[a];
            detail::project(trial);
            const double tc = cost_of(trial);
            if (!std::isfinite(tc))
                throw Error(ErrorKind::Convergence, "Drude fit produced a non-finite cost", rep.cost_trace);
            if (tc <= cost) {
                const double rel = (cost - tc) / std::max(cost, 1e-300);
                p = trial;
                cost = tc;
                lambda = std::max(lambda * 0.3, 1e-15);
                improved = true;
                stalls = rel < opt.tolerance ? stalls + 1 : 0;
            } else {
                lambda *= 4.0;
            }
        }
        rep.cost_trace.push_back(cost);
        if (!improved || stalls >= 3 || cost < 1e-28) break;
        // Slow creep along a flat valley: stop once the last window of
        // iterations gained less than window_gain relative improvement.
        const auto n = rep.cost_trace.size();
        if (n > static_cast<std::size_t>(opt.creep_window) &&
            rep.cost_trace[n - 1 - opt.creep_window] - cost < opt.creep_gain * cost)
            break;
    }
    if (it >= opt.max_iterations)
        throw Error(ErrorKind::Convergence, "Drude fit did not converge", rep.cost_trace);

    rep.iterations = it + 1;
    rep.cost = cost;
    rep.params.eps_inf = p[0];
    rep.params.omega_p = ev_to_rad_per_s(p[1]);
    rep.params.gamma = ev_to_rad_per_s(p[2]);
    rep.params.sigma = ev_to_rad_per_s(p[3]) * eps0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Complex e = detail::drude_ev(p, w[i]);
        rep.max_rel_residual =
            std::max(rep.max_rel_residual, std::abs(e - samples[i].eps) / std::abs(samples[i].eps));
    }
    rep.samples = std::move(samples);
    return rep;
}

inline FitReport fit_drude(const TabulatedOptics& data, double center_nm, const FitOptions& opt = {})
{
    auto samples = fit_window_samples(data, center_nm, opt);
    return fit_drude_samples(std::move(samples),
                             FitWindow{center_nm - 0.5 * opt.window_nm, center_nm + 0.5 * opt.window_nm}, opt);
}

/// Fitted material restricted to the 100 nm window around `center_nm`.
inline MaterialModel fitted_material(const TabulatedOptics& data, double center_nm, const FitOptions& opt = {})
{
    const auto rep = fit_drude(data, center_nm, opt);
    return MaterialModel::drude(rep.params, rep.window, data.label());
}

}  // namespace nc::materials
