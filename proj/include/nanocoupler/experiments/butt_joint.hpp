#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nanocoupler/core/log.hpp"
#include "nanocoupler/experiments/digest.hpp"
#include "nanocoupler/fdtd/dump.hpp"
#include "nanocoupler/fdtd/runner.hpp"
#include "nanocoupler/geometry/rasterize.hpp"
#include "nanocoupler/modes/solvers.hpp"

namespace nc::experiments {

using geometry::ButtJointParams;
using geometry::Direction;

struct SnapshotOptions {
    double every_fs = 0.0;  // 0 disables field dumps
    std::filesystem::path dir;
    int max_count = 200;
};

struct EtaOptions {
    double pitch_nm = 2.0;
    double courant = 0.5;
    double ramp_periods = 5.0;
    int pml_cells = 10;
    fdtd::SteadyCriterion steady;
    std::optional<double> monitor_offset_nm;  // distance of the T and incident planes from the joint; default lambda
    bool align_to_wire = true;  // nudge the pitch so the wire surface lies on a cell face
    SnapshotOptions snapshots;
};

struct RunResult {
    double eta = 0.0;
    double reflectivity = 0.0;
    double incident_power_w = 0.0;
    double transmitted_mode_power_w = 0.0;
    // Power bookkeeping inside the box between the incident and transmission planes,
    // each normalised to the incident modal power at the box entrance.
    double box_transmitted = 0.0;
    double box_reflected = 0.0;
    double absorbed_fraction = 0.0;
    double radiated_fraction = 0.0;
    double closure = 0.0;
    std::string config_digest;
    double grid_pitch_nm = 0.0;
    int steady_periods = 0;
    int reference_periods = 0;
    std::vector<std::string> material_labels;
    double launch_n_eff = 0.0;
    double receive_n_eff = 0.0;
    double launch_loss_db_per_um = 0.0;     // from the grid eigenmode
    double reference_decay_db_per_um = 0.0; // measured flux decay in the reference run
};

/// Canonical text of everything that determines a butt-joint run.
inline std::string describe(const materials::MaterialModel& m)
{
    std::ostringstream s;
    s << m.label << '[' << fmt(m.eps_static());
    if (const auto* d = m.drude_params())
        s << ',' << fmt(d->omega_p) << ',' << fmt(d->gamma) << ',' << fmt(d->sigma);
    s << ']';
    return s.str();
}

inline std::string describe(const ButtJointParams& p, const EtaOptions& o)
{
    std::ostringstream s;
    s << "butt_joint;r_mw=" << fmt(p.r_mw_nm) << ";r_df=" << fmt(p.r_df_nm) << ";metal=" << describe(p.metal)
      << ";dielectric=" << describe(p.dielectric) << ";gap=" << fmt(p.gap_nm) << ";edge=" << fmt(p.edge_radius_nm)
      << ";launch=" << fmt(p.launch_length_nm) << ";receive=" << fmt(p.receive_length_nm)
      << ";r_max=" << fmt(p.r_max_nm) << ";dir=" << geometry::to_string(p.direction)
      << ";lambda=" << fmt(p.lambda_vac_nm) << ";pitch=" << fmt(o.pitch_nm) << ";courant=" << fmt(o.courant)
      << ";ramp=" << fmt(o.ramp_periods) << ";pml=" << o.pml_cells << ";tol=" << fmt(o.steady.tolerance)
      << ";min=" << o.steady.min_periods << ";max=" << o.steady.max_periods
      << ";confirm=" << o.steady.confirm_periods << ";offset=" << fmt(o.monitor_offset_nm.value_or(p.lambda_vac_nm))
      << ";align=" << o.align_to_wire;
    return s.str();
}

/// Fills unset lengths with the defaults: two wavelengths of guide on each
/// side of the joint and a radial extent of two wavelengths.
inline ButtJointParams with_default_extent(ButtJointParams p)
{
    const double l2 = 2.0 * p.lambda_vac_nm;
    if (p.launch_length_nm <= 0.0) p.launch_length_nm = l2;
    if (p.receive_length_nm <= 0.0) p.receive_length_nm = l2 + p.gap_nm;
    if (p.r_max_nm <= 0.0) p.r_max_nm = l2;
    return p;
}

/// Same, with every extent rounded up to whole cells so that the joint plane
/// z = 0 coincides with an Er plane of the grid.
inline ButtJointParams with_default_extent(ButtJointParams p, double pitch_nm)
{
    p = with_default_extent(p);
    auto up = [&](double x) { return std::ceil(x / pitch_nm - 1e-9) * pitch_nm; };
    p.launch_length_nm = up(p.launch_length_nm);
    p.receive_length_nm = up(p.receive_length_nm);
    p.r_max_nm = up(p.r_max_nm);
    return p;
}

/// Pitch used for a run. With alignment on, the requested pitch is rounded
/// so the wire radius is a whole number of cells.
inline double effective_pitch(const ButtJointParams& p, const EtaOptions& o)
{
    if (!(o.pitch_nm > 0.0)) throw Error(ErrorKind::Config, "grid pitch must be positive");
    if (!o.align_to_wire) return o.pitch_nm;
    return p.r_mw_nm / std::max(1.0, std::round(p.r_mw_nm / o.pitch_nm));
}

inline EtaOptions aligned(const ButtJointParams& p, EtaOptions o)
{
    o.pitch_nm = effective_pitch(p, o);
    o.align_to_wire = false;
    return o;
}

namespace detail {

struct Layout {
    int j_src, j_refl, j_inc, j_joint, j_trans;
    int i_side;
};

inline Layout layout(const fdtd::Simulation& sim, const ButtJointParams& p, double offset)
{
    const auto& g = sim.grid();
    const int n = sim.pml_cells();
    Layout l{};
    l.j_refl = sim.pml_z_lo_end() + 10;
    l.j_src = l.j_refl + 10;
    l.j_inc = g.j_of(-offset);
    l.j_joint = g.j_of(0.0);
    l.j_trans = g.j_of(p.gap_nm + offset);
    l.i_side = sim.pml_r_start() - 10;
    if (l.j_inc - l.j_src < 10 || sim.pml_z_hi_start() - l.j_trans < 10 || l.i_side < n)
        throw Error(ErrorKind::Config, "monitor planes closer than 10 cells to a PML or the TF/SF plane",
                    {double(l.j_src), double(l.j_inc), double(l.j_trans), double(sim.pml_z_hi_start())});
    return l;
}

inline modes::GuidedMode analytic_mode(const materials::MaterialModel& m, double radius, double lambda)
{
    if (m.is_dispersive())
        return modes::solve_wire_spp(materials::eval_permittivity(m, lambda), 1.0, radius, lambda);
    return modes::solve_fiber_tm01(std::sqrt(m.eps_static()), 1.0, radius, lambda);
}

inline fdtd::SimParams sim_params(const ButtJointParams& p, const EtaOptions& o)
{
    fdtd::SimParams sp;
    sp.lambda_nm = p.lambda_vac_nm;
    sp.courant = o.courant;
    sp.pml.cells = o.pml_cells;
    return sp;
}

inline std::function<void(const fdtd::Simulation&)> snapshot_hook(const SnapshotOptions& so, double dt,
                                                                  const std::string& tag)
{
    if (so.every_fs <= 0.0) return {};
    const long every = std::max(1L, std::lround(so.every_fs / fs_per_internal_time / dt));
    std::filesystem::create_directories(so.dir);
    auto count = std::make_shared<int>(0);
    return [=](const fdtd::Simulation& s) {
        if (s.step_index() % every != 0 || *count >= so.max_count) return;
        ++*count;
        const auto path = so.dir / (tag + "_hphi_" + std::to_string(s.step_index()) + ".borf");
        fdtd::write_borf(path.string(), s.hp, s.grid().pitch_nm, fdtd::FieldId::Hphi, s.step_index());
    };
}

}  // namespace detail

/// Incident-power reference from an infinitely long launch guide.
struct ReferenceResult {
    double power_joint = 0.0;     // modal power at the joint plane (internal units)
    double power_entrance = 0.0;  // modal power at the incident plane
    double flux_entrance = 0.0;   // total flux through the incident plane
    double decay_db_per_um = 0.0; // total-flux attenuation between the two planes
    int periods = 0;
};

/// Thread-safe memo of reference runs keyed by their canonical description.
class ReferenceCache {
public:
    std::optional<ReferenceResult> find(const std::string& key)
    {
        std::lock_guard lock(m_);
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }
    void store(const std::string& key, const ReferenceResult& r)
    {
        std::lock_guard lock(m_);
        map_[key] = r;
    }

private:
    std::mutex m_;
    std::map<std::string, ReferenceResult> map_;
};

inline ReferenceResult reference_run(const ButtJointParams& p_in, const EtaOptions& o_in, ReferenceCache* cache = nullptr)
{
    const auto o = aligned(p_in, o_in);
    const auto p = with_default_extent(p_in, o.pitch_nm);
    const bool mw_first = p.direction == Direction::MWtoDF;
    const auto& launch_mat = mw_first ? p.metal : p.dielectric;
    const double launch_r = mw_first ? p.r_mw_nm : p.r_df_nm;

    std::ostringstream key;
    key << "reference;" << describe(launch_mat) << ";r=" << fmt(launch_r) << ";launch=" << fmt(p.launch_length_nm)
        << ";receive=" << fmt(p.receive_length_nm) << ";r_max=" << fmt(p.r_max_nm)
        << ";lambda=" << fmt(p.lambda_vac_nm) << ";pitch=" << fmt(o.pitch_nm) << ";courant=" << fmt(o.courant)
        << ";ramp=" << fmt(o.ramp_periods) << ";pml=" << o.pml_cells << ";tol=" << fmt(o.steady.tolerance)
        << ";min=" << o.steady.min_periods << ";max=" << o.steady.max_periods
        << ";confirm=" << o.steady.confirm_periods << ";offset=" << fmt(o.monitor_offset_nm.value_or(p.lambda_vac_nm));
    const std::string k = key.str();
    if (cache)
        if (auto hit = cache->find(k)) return *hit;

    geometry::Scene s;
    s.lambda_vac_nm = p.lambda_vac_nm;
    s.domain = {p.r_max_nm, -p.launch_length_nm, p.receive_length_nm};
    s.elements.push_back({geometry::Cylinder{launch_r, s.domain.z_min_nm, s.domain.z_max_nm}, launch_mat, "launch"});
    const auto med = geometry::rasterize(s, o.pitch_nm);
    fdtd::Simulation sim(med, detail::sim_params(p, o));
    const auto lay = detail::layout(sim, p, o.monitor_offset_nm.value_or(p.lambda_vac_nm));

    const auto guess = detail::analytic_mode(launch_mat, launch_r, p.lambda_vac_nm);
    auto dm = fdtd::solve_discrete_mode(sim, lay.j_src, guess.beta());
    fdtd::TfsfSource src(sim, dm, true, 1.0, o.ramp_periods);
    src.install(sim);

    const auto& g = sim.grid();
    std::vector<fdtd::PlaneMonitor> planes{{lay.j_inc, lay.i_side}, {lay.j_joint, lay.i_side}};
    fdtd::Lockin fl, ml;
    for (auto& pl : planes) pl.attach(fl, g);
    const auto rec = fdtd::run_until_steady(sim, planes, fl, ml, o.steady);
    ReferenceResult r;
    const auto a_inc = planes[0].modal(fl, g, dm);
    const auto a_joint = planes[1].modal(fl, g, dm);
    r.power_entrance = std::norm(a_inc.forward) * a_inc.mode_power;
    r.power_joint = std::norm(a_joint.forward) * a_joint.mode_power;
    r.flux_entrance = planes[0].flux(fl, g);
    const double span_um = (g.z_er(lay.j_joint) - g.z_er(lay.j_inc)) * 1e-3;
    r.decay_db_per_um = 10.0 * std::log10(planes[0].flux(fl, g) / planes[1].flux(fl, g)) / span_um;
    r.periods = rec.periods;
    if (cache) cache->store(k, r);
    return r;
}

/// Butt-joint conversion efficiency: modal power in the receiving guide just
/// after the joint over the incident modal power just before it.
inline RunResult measure_eta(const ButtJointParams& p_in, const EtaOptions& o_in = {}, ReferenceCache* cache = nullptr)
{
    const auto o = aligned(p_in, o_in);
    const auto p = with_default_extent(p_in, o.pitch_nm);
    const double offset = o.monitor_offset_nm.value_or(p.lambda_vac_nm);
    const bool mw_first = p.direction == Direction::MWtoDF;
    const auto& launch_mat = mw_first ? p.metal : p.dielectric;
    const auto& recv_mat = mw_first ? p.dielectric : p.metal;
    const double launch_r = mw_first ? p.r_mw_nm : p.r_df_nm;
    const double recv_r = mw_first ? p.r_df_nm : p.r_mw_nm;

    // Fails early with a no-mode error when either guide is below cutoff.
    const auto launch_guess = detail::analytic_mode(launch_mat, launch_r, p.lambda_vac_nm);
    const auto recv_guess = detail::analytic_mode(recv_mat, recv_r, p.lambda_vac_nm);

    const auto ref = reference_run(p, o, cache);

    const auto scene = geometry::butt_joint_scene(p);
    const auto med = geometry::rasterize(scene, o.pitch_nm);
    for (const auto& w : med.warnings) log::warn(w);
    fdtd::Simulation sim(med, detail::sim_params(p, o));
    const auto lay = detail::layout(sim, p, offset);
    const auto& g = sim.grid();

    auto launch = fdtd::solve_discrete_mode(sim, lay.j_src, launch_guess.beta());
    const auto recv = fdtd::solve_discrete_mode(sim, lay.j_trans, recv_guess.beta());
    fdtd::TfsfSource src(sim, launch, true, 1.0, o.ramp_periods);
    src.install(sim);

    std::vector<fdtd::PlaneMonitor> planes{{lay.j_inc, lay.i_side}, {lay.j_trans, lay.i_side}};
    fdtd::Lockin fl, ml;
    for (auto& pl : planes) pl.attach(fl, g);
    fdtd::PlaneMonitor refl{lay.j_refl, lay.i_side};
    refl.attach(ml, g);
    fdtd::PlaneMonitor inc{lay.j_inc, lay.i_side}, trans{lay.j_trans, lay.i_side};
    inc.attach(ml, g);
    trans.attach(ml, g);
    fdtd::SideMonitor side{lay.i_side, lay.j_inc, lay.j_trans};
    side.attach(ml, g);
    fdtd::AbsorptionMonitor absorb{g.r_ez(lay.i_side), g.z_er(lay.j_inc), g.z_er(lay.j_trans), {}, {}};
    absorb.attach(ml, sim);

    const auto hook = detail::snapshot_hook(o.snapshots, sim.dt(), "joint_" + geometry::to_string(p.direction));
    const auto rec = fdtd::run_until_steady(sim, planes, fl, ml, o.steady, hook);

    const auto a_t = trans.modal(ml, g, recv);
    const double recv_decay = std::exp(2.0 * recv.beta.imag() * (g.z_er(lay.j_trans) - p.gap_nm));
    const double p_trans_joint = std::norm(a_t.forward) * a_t.mode_power * recv_decay;

    const auto a_r = refl.modal(ml, g, launch);
    const double launch_decay = std::exp(2.0 * launch.beta.imag() * (0.0 - g.z_er(lay.j_refl)));
    const double p_refl_joint = std::norm(a_r.backward) * a_r.mode_power * launch_decay;

    RunResult r;
    r.eta = p_trans_joint / ref.power_joint;
    r.reflectivity = p_refl_joint / ref.power_joint;
    r.incident_power_w = ref.power_joint * watts_per_internal_power;
    r.transmitted_mode_power_w = p_trans_joint * watts_per_internal_power;

    const double p_entry = ref.power_entrance;
    const auto a_i = inc.modal(ml, g, launch);
    const double t_mode = std::norm(a_t.forward) * a_t.mode_power;
    const double t_flux = trans.flux(ml, g);
    r.box_transmitted = t_mode / p_entry;
    const double back_mode = std::norm(a_i.backward) * a_i.mode_power;
    // Everything crossing the incident plane backwards that is not the guided mode.
    const double back_other = (ref.flux_entrance - inc.flux(ml, g)) - back_mode;
    r.box_reflected = back_mode / p_entry;
    r.absorbed_fraction = absorb.power(ml) / p_entry;
    r.radiated_fraction = (side.flux(ml, g) + (t_flux - t_mode) + back_other) / p_entry;
    r.closure = r.box_transmitted + r.box_reflected + r.absorbed_fraction + r.radiated_fraction;

    r.config_digest = fnv1a_hex(describe(p, o));
    r.grid_pitch_nm = o.pitch_nm;
    r.steady_periods = rec.periods;
    r.reference_periods = ref.periods;
    r.material_labels = med.material_labels;
    r.launch_n_eff = launch.n_eff(p.lambda_vac_nm);
    r.receive_n_eff = recv.n_eff(p.lambda_vac_nm);
    r.launch_loss_db_per_um = 2.0 * db_per_neper_power * launch.beta.imag() * 1000.0;
    r.reference_decay_db_per_um = ref.decay_db_per_um;
    return r;
}

}  // namespace nc::experiments
