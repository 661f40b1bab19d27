#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/materials/material.hpp"
#include "nanocoupler/modes/solvers.hpp"

namespace nc::modes {

enum class OverlapForm {
    Unconjugated,  // bi-orthogonal form for lossy guides
    Conjugated,    // power-orthogonal form, exact for lossless guides
};

struct OverlapReport {
    double eta_estimate = 0.0;
    Complex overlap_integral;     // W
    double normalization_a = 0.0;  // W
    double normalization_b = 0.0;  // W
};

namespace detail {

/// Trapezoid integral of g(fa, fb, r) over the union of both sample grids,
/// split at both interfaces.
template <class G>
Complex pair_integral(const ModeProfile& pa, const ModeProfile& pb, G g)
{
    const double end = std::min(pa.extent(), pb.extent());
    std::vector<double> nodes;
    nodes.reserve(pa.size() + pb.size() + 2);
    for (double r : pa.r)
        if (r <= end) nodes.push_back(r);
    for (double r : pb.r)
        if (r <= end) nodes.push_back(r);
    for (double r : {pa.interface_nm, pb.interface_nm})
        if (r < end) nodes.push_back(r);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    Complex s = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double r0 = nodes[i], r1 = nodes[i + 1];
        const double mid = 0.5 * (r0 + r1);
        const bool ina = mid < pa.interface_nm, inb = mid < pb.interface_nm;
        s += 0.5 * (g(pa.at(r0, ina), pb.at(r0, inb), r0) + g(pa.at(r1, ina), pb.at(r1, inb), r1)) * (r1 - r0);
    }
    return s;
}

}  // namespace detail

/// Butt-coupling estimate from the transverse overlap of two modes at the
/// joint plane. Both forms are symmetric in (a, b) and give eta(a, a) = 1.
inline OverlapReport match_modes(const GuidedMode& a, const GuidedMode& b,
                                 OverlapForm form = OverlapForm::Unconjugated)
{
    if (std::abs(a.lambda_vac_nm - b.lambda_vac_nm) > 1e-9 * a.lambda_vac_nm)
        throw Error(ErrorKind::Config, "mode_matching needs both modes at the same wavelength");
    if (a.profile.size() < 2 || b.profile.size() < 2)
        throw Error(ErrorKind::Degenerate, "mode profile is empty");

    const bool conj = form == OverlapForm::Conjugated;
    auto cross = [conj](const ModeProfile& p, const ModeProfile& q) {
        return detail::pair_integral(p, q, [conj](const FieldSample& u, const FieldSample& v, double r) {
            return u.er * (conj ? std::conj(v.hphi) : v.hphi) * r;
        });
    };
    const Complex x = cross(a.profile, b.profile);
    const Complex y = cross(b.profile, a.profile);
    const Complex na = cross(a.profile, a.profile);
    const Complex nb = cross(b.profile, b.profile);

    const double unit = pi * watts_per_internal_power;  // 1/2 · 2pi · nm^2 -> W
    OverlapReport rep;
    // The magnitude of the self products absorbs the small non-Hermitian
    // power defect of lossy modes so that eta(a, a) = 1 in both forms.
    rep.normalization_a = std::abs(na) * unit;
    rep.normalization_b = std::abs(nb) * unit;
    rep.overlap_integral = std::sqrt(x * y) * unit;
    rep.eta_estimate = std::abs(x * y) / (std::abs(na) * std::abs(nb));
    if (!(rep.normalization_a > 0.0) || !(rep.normalization_b > 0.0))
        throw Error(ErrorKind::Degenerate, "mode carries no power");
    rep.eta_estimate = std::clamp(rep.eta_estimate, 0.0, 1.0);
    return rep;
}

struct SearchBox {
    double r_mw_lo_nm = 0.0, r_mw_hi_nm = 0.0;
    double r_df_lo_nm = 0.0, r_df_hi_nm = 0.0;
    double step_nm = 4.0;
};

struct SeedResult {
    double r_mw_nm = 0.0;
    double r_df_nm = 0.0;
    double eta_estimate = 0.0;
};

inline std::vector<double> box_axis(double lo, double hi, double step)
{
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) v.push_back(lo + i * step);
    return v;
}

/// Grid-search argmax of match_modes over a radius box. Ties go to the
/// smaller wire radius, then the smaller fibre radius.
inline SeedResult seed_radii(const materials::MaterialModel& metal, double df_index, double lambda_nm,
                             const SearchBox& box, double clad_index = 1.0,
                             OverlapForm form = OverlapForm::Unconjugated, double profile_step_nm = 2.0)
{
    if (!(box.step_nm > 0.0) || box.r_mw_hi_nm < box.r_mw_lo_nm || box.r_df_hi_nm < box.r_df_lo_nm ||
        !(box.r_mw_lo_nm > 0.0) || !(box.r_df_lo_nm > 0.0))
        throw Error(ErrorKind::Domain, "empty or invalid radius search box");

    const Complex eps = materials::eval_permittivity(metal, lambda_nm);
    const ProfileOptions popt{profile_step_nm};
    std::vector<std::pair<double, GuidedMode>> wires, fibers;
    for (double r : box_axis(box.r_mw_lo_nm, box.r_mw_hi_nm, box.step_nm)) {
        try {
            wires.emplace_back(r, solve_wire_spp(eps, clad_index, r, lambda_nm, popt));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoMode && e.kind() != ErrorKind::Branch) throw;
        }
    }
    for (double r : box_axis(box.r_df_lo_nm, box.r_df_hi_nm, box.step_nm)) {
        try {
            fibers.emplace_back(r, solve_fiber_tm01(df_index, clad_index, r, lambda_nm, popt));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoMode) throw;
        }
    }
    if (wires.empty() || fibers.empty())
        throw Error(ErrorKind::NoMode, "no guided mode pair inside the search box");

    SeedResult best{0.0, 0.0, -1.0};
    for (const auto& [rw, mw] : wires) {
        for (const auto& [rf, mf] : fibers) {
            const double eta = match_modes(mw, mf, form).eta_estimate;
            if (eta > best.eta_estimate) best = {rw, rf, eta};
        }
    }
    return best;
}

}  // namespace nc::modes
