#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nanocoupler/experiments/butt_joint.hpp"

namespace nc::experiments {

enum class SnomMode { Illuminate, Collect };

inline std::string to_string(SnomMode m) { return m == SnomMode::Illuminate ? "illuminate" : "collect"; }

struct SnomOptions {
    double pitch_nm = 0.5;
    double courant = 0.5;
    double ramp_periods = 5.0;
    int pml_cells = 10;
    fdtd::SteadyCriterion steady;
    double box_half_size_nm = 2.0;  // emitter flux box: |z - z_e| <= d, r <= d
    bool allow_coarse_gap = false;  // keep the < 4 cells-per-gap warning from being fatal
    SnapshotOptions snapshots;
};

struct SnomResult {
    SnomMode mode = SnomMode::Illuminate;
    double enhancement = 0.0;          // max |E|^2 in the gap over the peak |E|^2 of the fibre mode
    double enhancement_midpoint = 0.0; // same at the gap midpoint on the axis
    double collection_eta = 0.0;       // TM01 power in the fibre over the emitted dipole power
    double dipole_power = 0.0;         // internal units
    double mode_power = 0.0;
    int steady_periods = 0;
    double pitch_nm = 0.0;
    std::string config_digest;
    std::vector<std::string> material_labels;
    std::vector<std::string> warnings;
};

inline std::string describe(const geometry::SnomParams& p, SnomMode m, const SnomOptions& o)
{
    std::ostringstream s;
    s << "snom;" << to_string(m) << ";df_r=" << fmt(p.df_radius_nm) << ";base=" << fmt(p.cone_base_radius_nm)
      << ";angle=" << fmt(p.opening_angle_deg) << ";full=" << p.full_angle << ";apex=" << fmt(p.apex_radius_nm)
      << ";gap=" << fmt(p.tip_substrate_gap_nm) << ";n_sub=" << fmt(p.substrate_index)
      << ";depth=" << fmt(p.emitter_depth_nm) << ";metal=" << describe(p.metal)
      << ";dielectric=" << describe(p.dielectric) << ";lambda=" << fmt(p.lambda_vac_nm)
      << ";df_len=" << fmt(p.df_length_nm) << ";sub=" << fmt(p.substrate_depth_nm) << ";r_max=" << fmt(p.r_max_nm)
      << ";pitch=" << fmt(o.pitch_nm) << ";courant=" << fmt(o.courant) << ";ramp=" << fmt(o.ramp_periods)
      << ";pml=" << o.pml_cells << ";tol=" << fmt(o.steady.tolerance) << ";box=" << fmt(o.box_half_size_nm);
    return s.str();
}

/// Default extents: one wavelength of fibre before the cone base, half a
/// wavelength of substrate and a radial extent of two wavelengths.
inline geometry::SnomParams with_default_extent(geometry::SnomParams p)
{
    if (p.df_length_nm <= 0.0) p.df_length_nm = p.lambda_vac_nm;
    if (p.substrate_depth_nm <= 0.0) p.substrate_depth_nm = 0.5 * p.lambda_vac_nm;
    if (p.r_max_nm <= 0.0) p.r_max_nm = 2.0 * p.lambda_vac_nm;
    return p;
}

/// Peak |E|^2 of a discrete mode over its cross-section.
inline double mode_peak_intensity(const fdtd::DiscreteMode& m)
{
    double peak = 0.0;
    for (std::size_t i = 0; i < m.er.size(); ++i) {
        const Complex ez = 0.5 * (m.ez[i] + m.ez[i + 1]);
        peak = std::max(peak, std::norm(m.er[i]) + std::norm(ez));
    }
    return std::max(peak, std::norm(m.ez[0]));
}

inline SnomResult snom_run(const geometry::SnomParams& p_in, SnomMode mode, const SnomOptions& o = {})
{
    const auto p = with_default_extent(p_in);
    const auto scene = geometry::snom_scene(p);
    const auto med = geometry::rasterize(scene, o.pitch_nm);
    SnomResult res;
    res.mode = mode;
    res.pitch_nm = o.pitch_nm;
    res.warnings = med.warnings;
    res.material_labels = med.material_labels;
    res.config_digest = fnv1a_hex(describe(p, mode, o));
    if (!med.warnings.empty() && !o.allow_coarse_gap)
        throw Error(ErrorKind::Resolution, med.warnings.front());

    fdtd::SimParams sp;
    sp.lambda_nm = p.lambda_vac_nm;
    sp.courant = o.courant;
    sp.pml.cells = o.pml_cells;
    fdtd::Simulation sim(med, sp);
    const auto& g = sim.grid();
    const int j_src = sim.pml_z_lo_end() + 20;
    const int j_mon = j_src + 10;
    const int i_side = sim.pml_r_start() - 10;
    if (g.z_er(j_mon) > -10.0 * g.pitch_nm)
        throw Error(ErrorKind::Config, "fibre section too short for the source and monitor planes");

    const auto guess = modes::solve_fiber_tm01(std::sqrt(p.dielectric.eps_static()), 1.0, p.df_radius_nm,
                                               p.lambda_vac_nm);
    const auto& cone = std::get<geometry::ConeParaboloid>(scene.elements[1].shape);
    const double z_tip = cone.tip_z_nm;
    const double z_sub = z_tip + p.tip_substrate_gap_nm;
    const auto hook = detail::snapshot_hook(o.snapshots, sim.dt(), "snom_" + to_string(mode));

    if (mode == SnomMode::Illuminate) {
        const auto dm = fdtd::solve_discrete_mode(sim, j_src, guess.beta());
        fdtd::TfsfSource src(sim, dm, true, 1.0, o.ramp_periods);
        src.install(sim);

        fdtd::Lockin fl, ml;
        std::vector<fdtd::PlaneMonitor> planes{{j_mon, i_side}};
        planes[0].attach(fl, g);
        // Gap cells: Ez rows whose centres lie between tip and substrate, r up to two apex radii.
        const int i_gap = std::max(1, static_cast<int>(std::ceil(2.0 * p.apex_radius_nm / g.pitch_nm)));
        std::vector<int> rows;
        for (int j = 0; j < g.nz; ++j)
            if (g.z_ez(j) > z_tip && g.z_ez(j) < z_sub) rows.push_back(j);
        if (rows.empty()) throw Error(ErrorKind::Resolution, "tip gap contains no grid row");
        struct Cell {
            std::size_t ez0, ez1, er0, er1;
            bool axis;
        };
        std::vector<Cell> cells;
        for (int j : rows) {
            cells.push_back({ml.add(fdtd::Comp::Ez, static_cast<std::size_t>(j)), 0, 0, 0, true});
            for (int i = 0; i < i_gap && i + 1 <= g.nr; ++i) {
                Cell c{};
                c.ez0 = ml.add(fdtd::Comp::Ez, static_cast<std::size_t>(i) * g.nz + j);
                c.ez1 = ml.add(fdtd::Comp::Ez, static_cast<std::size_t>(i + 1) * g.nz + j);
                c.er0 = ml.add(fdtd::Comp::Er, static_cast<std::size_t>(i) * (g.nz + 1) + j);
                c.er1 = ml.add(fdtd::Comp::Er, static_cast<std::size_t>(i) * (g.nz + 1) + j + 1);
                c.axis = false;
                cells.push_back(c);
            }
        }
        const auto rec = fdtd::run_until_steady(sim, planes, fl, ml, o.steady, hook);
        double peak = 0.0;
        for (const auto& c : cells) {
            const double e2 = c.axis ? std::norm(ml[c.ez0])
                                     : std::norm(0.5 * (ml[c.ez0] + ml[c.ez1])) + std::norm(0.5 * (ml[c.er0] + ml[c.er1]));
            peak = std::max(peak, e2);
        }
        const double ref = mode_peak_intensity(dm);
        res.enhancement = peak / ref;
        // Axis cell nearest the gap midpoint.
        {
            std::size_t best = 0;
            double dist = INFINITY;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const double d = std::abs(g.z_ez(rows[k]) - 0.5 * (z_tip + z_sub));
                if (d < dist) {
                    dist = d;
                    best = k;
                }
            }
            std::size_t seen = 0;
            for (const auto& c : cells)
                if (c.axis && seen++ == best) res.enhancement_midpoint = std::norm(ml[c.ez0]) / ref;
        }
        res.mode_power = planes[0].flux(fl, g);
        res.steady_periods = rec.periods;
        return res;
    }

    // Collection: axial dipole in the substrate, TM01 flux back into the fibre.
    if (!scene.emitter_z_nm) throw Error(ErrorKind::Geometry, "scene has no emitter");
    const double ze = *scene.emitter_z_nm;
    fdtd::DipoleSource dip(ze, 1.0, o.ramp_periods);
    dip.install(sim);
    const int jd = dip.row(g);
    const int nb = std::max(2, static_cast<int>(std::lround(o.box_half_size_nm / g.pitch_nm)));
    const int j_lo = jd - nb + 1, j_hi = jd + nb;  // Er planes enclosing the dipole's Ez row
    if (g.z_er(j_lo) <= z_sub + 1e-9) log::warn("emitter flux box reaches the substrate surface");

    auto dm = fdtd::solve_discrete_mode(sim, j_mon, guess.beta());
    fdtd::Lockin fl, ml;
    std::vector<fdtd::PlaneMonitor> planes{{j_mon, i_side}, {j_lo, nb}, {j_hi, nb}};
    for (auto& pl : planes) pl.attach(fl, g);
    fdtd::SideMonitor side{nb, j_lo, j_hi};
    side.attach(ml, g);
    fdtd::PlaneMonitor lo{j_lo, nb}, hi{j_hi, nb}, df{j_mon, i_side};
    lo.attach(ml, g);
    hi.attach(ml, g);
    df.attach(ml, g);
    const auto rec = fdtd::run_until_steady(sim, planes, fl, ml, o.steady, hook);
    res.dipole_power = hi.flux(ml, g) - lo.flux(ml, g) + side.flux(ml, g);
    const auto a = df.modal(ml, g, dm);
    res.mode_power = std::norm(a.backward) * a.mode_power;
    res.collection_eta = res.mode_power / res.dipole_power;
    res.steady_periods = rec.periods;
    return res;
}

}  // namespace nc::experiments
