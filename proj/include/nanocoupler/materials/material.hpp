#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/core/log.hpp"
#include "nanocoupler/core/units.hpp"

namespace nc::materials {

/// Drude model with an additional DC-like conductivity term:
///   eps(w) = eps_inf - wp^2/(w^2 + i·gamma·w) + i·sigma/(eps0·w)
struct DrudeParams {
    double eps_inf = 1.0;
    double omega_p = 0.0;  // rad/s
    double gamma = 0.0;    // rad/s
    double sigma = 0.0;    // S/m

    void validate() const
    {
        if (!(eps_inf >= 1.0)) throw Error(ErrorKind::Domain, "Drude eps_inf must be >= 1");
        if (!(omega_p > 0.0)) throw Error(ErrorKind::Domain, "Drude omega_p must be > 0");
        if (!(gamma >= 0.0)) throw Error(ErrorKind::Domain, "Drude gamma must be >= 0");
        if (!(sigma >= 0.0)) throw Error(ErrorKind::Domain, "Drude sigma must be >= 0");
    }

    Complex at_omega(double w) const
    {
        return eps_inf - omega_p * omega_p / Complex(w * w, gamma * w) + I * sigma / (eps0 * w);
    }

    /// d eps / d omega, analytic.
    Complex derivative_omega(double w) const
    {
        const Complex den = Complex(w * w, gamma * w);
        const Complex dden = Complex(2.0 * w, gamma);
        return omega_p * omega_p * dden / (den * den) - I * sigma / (eps0 * w * w);
    }

    // Coefficients in the internal unit system (rates per nm/c, sigma/eps0 as a rate).
    double omega_p_internal() const { return to_internal_rate(omega_p); }
    double gamma_internal() const { return to_internal_rate(gamma); }
    double sigma_internal() const { return to_internal_rate(sigma / eps0); }

    bool operator==(const DrudeParams&) const = default;
};

struct Vacuum {
    bool operator==(const Vacuum&) const = default;
};

struct Dielectric {
    double n = 1.0;
    bool operator==(const Dielectric&) const = default;
};

struct Drude {
    DrudeParams params;
    bool operator==(const Drude&) const = default;
};

using MaterialKind = std::variant<Vacuum, Dielectric, Drude>;

struct FitWindow {
    double lo_nm;
    double hi_nm;
    bool contains(double lambda_nm) const { return lambda_nm >= lo_nm && lambda_nm <= hi_nm; }
    bool operator==(const FitWindow&) const = default;
};

struct MaterialModel {
    MaterialKind kind = Vacuum{};
    std::optional<FitWindow> fit_window;
    std::string label = "vacuum";

    static MaterialModel vacuum() { return {}; }

    static MaterialModel dielectric(double n, std::string label = {})
    {
        if (!(n >= 1.0)) throw Error(ErrorKind::Domain, "dielectric index must be >= 1");
        return {Dielectric{n}, std::nullopt, label.empty() ? "n=" + std::to_string(n) : std::move(label)};
    }

    static MaterialModel drude(DrudeParams p, std::optional<FitWindow> window, std::string label)
    {
        p.validate();
        return {Drude{p}, window, std::move(label)};
    }

    bool is_dispersive() const { return std::holds_alternative<Drude>(kind); }

    const DrudeParams* drude_params() const
    {
        const auto* d = std::get_if<Drude>(&kind);
        return d ? &d->params : nullptr;
    }

    /// Instantaneous (non-dispersive) relative permittivity seen by the FDTD update.
    double eps_static() const
    {
        if (const auto* d = std::get_if<Dielectric>(&kind)) return d->n * d->n;
        if (const auto* d = std::get_if<Drude>(&kind)) return d->params.eps_inf;
        return 1.0;
    }

    bool operator==(const MaterialModel&) const = default;
};

/// Relative permittivity at a vacuum wavelength in nm.
inline Complex eval_permittivity(const MaterialModel& m, double lambda_vac_nm)
{
    if (!(lambda_vac_nm > 0.0)) throw Error(ErrorKind::Domain, "wavelength must be positive");
    if (m.fit_window && !m.fit_window->contains(lambda_vac_nm))
        log::warn("evaluating " + m.label + " at " + std::to_string(lambda_vac_nm) +
                  " nm, outside its fit window");
    return std::visit(
        [&](const auto& k) -> Complex {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Vacuum>) {
                return 1.0;
            } else if constexpr (std::is_same_v<T, Dielectric>) {
                return k.n * k.n;
            } else {
                return k.params.at_omega(omega_si(lambda_vac_nm));
            }
        },
        m.kind);
}

}  // namespace nc::materials
