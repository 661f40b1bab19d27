#pragma once

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nanocoupler/experiments/snom.hpp"
#include "nanocoupler/experiments/sweeps.hpp"
#include "nanocoupler/io/artifacts.hpp"
#include "nanocoupler/io/config.hpp"
#include "nanocoupler/materials/library.hpp"
#include "nanocoupler/modes/mode_matching.hpp"

namespace nc::io {

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> s = {"modes", "match", "run", "sweep", "optimize", "snom", "convergence"};
    return s;
}

namespace detail {

using experiments::fmt;

inline materials::MaterialLibrary library(const RunConfig& c)
{
    return c.materials.data_dir.empty() ? materials::MaterialLibrary{}
                                        : materials::MaterialLibrary{c.materials.data_dir};
}

inline materials::MaterialModel dielectric(double n)
{
    return materials::MaterialModel::dielectric(n, n == materials::silica_index ? "silica" : "n=" + fmt(n));
}

inline geometry::ButtJointParams joint(const RunConfig& c, materials::MaterialLibrary& lib)
{
    geometry::ButtJointParams p;
    p.r_mw_nm = c.geometry.r_mw_nm;
    p.r_df_nm = c.geometry.r_df_nm;
    p.gap_nm = c.geometry.gap_nm;
    p.edge_radius_nm = c.geometry.edge_radius_nm;
    p.lambda_vac_nm = c.geometry.lambda_nm;
    p.direction = c.geometry.direction == "df_to_mw" ? geometry::Direction::DFtoMW : geometry::Direction::MWtoDF;
    p.metal = lib.metal(c.materials.metal, c.materials.dataset, p.lambda_vac_nm);
    p.dielectric = dielectric(c.materials.dielectric_index);
    return p;
}

inline experiments::EtaOptions eta_options(const RunConfig& c, const std::filesystem::path& out)
{
    experiments::EtaOptions o;
    o.pitch_nm = c.grid.pitch_nm;
    o.courant = c.grid.courant;
    o.pml_cells = c.grid.pml_cells;
    o.ramp_periods = c.source.ramp_periods;
    o.steady = {c.steady.tolerance, c.steady.min_periods, c.steady.max_periods, c.steady.confirm_periods};
    o.monitor_offset_nm = c.monitors.offset_nm;
    o.align_to_wire = c.grid.align_to_wire;
    o.snapshots.every_fs = c.snapshots.every_fs;
    o.snapshots.max_count = c.snapshots.max_count;
    o.snapshots.dir = out / "dumps";
    return o;
}

inline experiments::OptimizeOptions optimize_options(const RunConfig& c)
{
    experiments::OptimizeOptions o;
    o.seed_span = c.optimize.seed_span;
    o.seed_step_nm = c.optimize.seed_step_nm;
    o.steps_nm = c.optimize.steps_nm;
    o.max_moves = c.optimize.max_moves;
    return o;
}

inline std::string num_or_nan(const std::optional<experiments::RunResult>& r, double experiments::RunResult::*f)
{
    return r ? fmt((*r).*f) : "nan";
}

inline Csv result_table(const experiments::RunResult& r)
{
    Csv t({"quantity", "value"});
    auto add = [&](const std::string& k, double v) { t.line({k, fmt(v)}); };
    add("eta", r.eta);
    add("R", r.reflectivity);
    add("incident_power_w", r.incident_power_w);
    add("transmitted_mode_power_w", r.transmitted_mode_power_w);
    add("absorbed_fraction", r.absorbed_fraction);
    add("radiated_fraction", r.radiated_fraction);
    add("closure", r.closure);
    add("grid_pitch_nm", r.grid_pitch_nm);
    add("steady_periods", r.steady_periods);
    add("reference_periods", r.reference_periods);
    add("launch_n_eff", r.launch_n_eff);
    add("receive_n_eff", r.receive_n_eff);
    add("launch_loss_db_per_um", r.launch_loss_db_per_um);
    add("reference_decay_db_per_um", r.reference_decay_db_per_um);
    return t;
}

inline nlohmann::json result_json(const experiments::RunResult& r)
{
    return {{"eta", r.eta},
            {"reflectivity", r.reflectivity},
            {"incident_power_w", r.incident_power_w},
            {"transmitted_mode_power_w", r.transmitted_mode_power_w},
            {"closure", r.closure},
            {"run_digest", r.config_digest},
            {"convergence", {{"grid_pitch_nm", r.grid_pitch_nm}, {"steady_periods", r.steady_periods}}}};
}

inline void record_sweep(ArtifactSet& out, const experiments::SweepResult& s)
{
    auto& m = out.manifest();
    m["pitch_nm"] = nlohmann::json::array();
    m["steady_periods"] = nlohmann::json::array();
    m["failures"] = nlohmann::json::array();
    for (std::size_t k = 0; k < s.points.size(); ++k) {
        const auto& p = s.points[k];
        if (p.result) {
            out.add_labels(p.result->material_labels);
            m["pitch_nm"].push_back(p.result->grid_pitch_nm);
            m["steady_periods"].push_back(p.result->steady_periods);
        } else {
            m["failures"].push_back({{"index", k}, {"error", p.error}});
        }
    }
    if (s.argmax) m["argmax"] = *s.argmax;
}

inline void modes_cmd(const RunConfig& c, ArtifactSet& out, std::ostream& console)
{
    auto lib = library(c);
    const auto metal = lib.metal(c.materials.metal, c.materials.dataset, c.geometry.lambda_nm);
    const double lam = c.geometry.lambda_nm;
    const modes::ProfileOptions popt{std::min(2.0, c.grid.pitch_nm)};
    const auto wire = modes::solve_wire_spp(materials::eval_permittivity(metal, lam), 1.0, c.geometry.r_mw_nm, lam, popt);
    const auto fiber = modes::solve_fiber_tm01(c.materials.dielectric_index, 1.0, c.geometry.r_df_nm, lam, popt);

    Csv summary({"mode", "radius_nm", "lambda_nm", "n_eff_re", "n_eff_im", "loss_db_per_um"});
    for (const auto* m : {&wire, &fiber}) {
        const double loss = modes::propagation_loss_db_per_um(*m);
        summary.line({to_string(m->kind), fmt(m->radius_nm), fmt(lam), fmt(m->n_eff.real()), fmt(m->n_eff.imag()),
                      fmt(loss)});
        console << to_string(m->kind) << " r=" << fmt(m->radius_nm) << " nm  n_eff=" << fmt(m->n_eff.real())
                << (m->n_eff.imag() < 0 ? "" : "+") << fmt(m->n_eff.imag()) << "i  loss=" << fmt(loss)
                << " dB/um\n";
        Csv prof({"r_nm", "Er_re", "Er_im", "Ez_re", "Ez_im", "Hphi_re", "Hphi_im"});
        const auto& p = m->profile;
        for (std::size_t i = 0; i < p.size(); ++i)
            prof.row({p.r[i], p.er[i].real(), p.er[i].imag(), p.ez[i].real(), p.ez[i].imag(), p.hphi[i].real(),
                      p.hphi[i].imag()});
        out.write(std::string("profile_") + (m == &wire ? "mw" : "df") + ".csv", prof);
    }
    out.write("modes.csv", summary);
    out.add_labels({metal.label, dielectric(c.materials.dielectric_index).label});
}

inline void match_cmd(const RunConfig& c, ArtifactSet& out, std::ostream& console)
{
    auto lib = library(c);
    const double lam = c.geometry.lambda_nm;
    const auto metal = lib.metal(c.materials.metal, c.materials.dataset, lam);
    const auto eps = materials::eval_permittivity(metal, lam);
    const auto r_mw = c.sweep.r_mw_nm.empty() ? std::vector{c.geometry.r_mw_nm} : c.sweep.r_mw_nm;
    const auto r_df = c.sweep.r_df_nm.empty() ? std::vector{c.geometry.r_df_nm} : c.sweep.r_df_nm;
    Csv t({"r_mw_nm", "r_df_nm", "eta"});
    double best = -1.0;
    for (double a : r_mw) {
        const auto wire = modes::solve_wire_spp(eps, 1.0, a, lam);
        for (double b : r_df) {
            const auto fiber = modes::solve_fiber_tm01(c.materials.dielectric_index, 1.0, b, lam);
            const double eta = modes::match_modes(wire, fiber).eta_estimate;
            t.row({a, b, eta});
            if (eta > best) {
                best = eta;
                out.manifest()["argmax"] = {{"r_mw_nm", a}, {"r_df_nm", b}, {"eta", eta}};
            }
        }
    }
    console << "mode-matching eta (best) = " << fmt(best) << "\n";
    out.write("match.csv", t);
    out.add_labels({metal.label});
}

inline void run_cmd(const RunConfig& c, ArtifactSet& out)
{
    auto lib = library(c);
    const auto r = experiments::measure_eta(joint(c, lib), eta_options(c, out.dir()));
    log::info("eta = " + fmt(r.eta) + ", R = " + fmt(r.reflectivity) + ", closure = " + fmt(r.closure));
    out.write("result.csv", result_table(r));
    out.add_labels(r.material_labels);
    out.manifest()["result"] = result_json(r);
    out.manifest()["pitch_nm"] = r.grid_pitch_nm;
    out.manifest()["steady_periods"] = r.steady_periods;
}

inline void sweep_cmd(const RunConfig& c, ArtifactSet& out)
{
    auto lib = library(c);
    experiments::SweepOptions so;
    so.eta = eta_options(c, out.dir());
    so.threads = c.output.threads;
    const auto& sw = c.sweep;

    if (sw.kind == "radius_map") {
        const auto s = experiments::radius_map(joint(c, lib), sw.r_mw_nm, sw.r_df_nm, so);
        Csv t({"r_mw_nm", "r_df_nm", "eta", "R"});
        for (const auto& p : s.points)
            t.line({fmt(p.r_mw_nm), fmt(p.r_df_nm), num_or_nan(p.result, &experiments::RunResult::eta),
                    num_or_nan(p.result, &experiments::RunResult::reflectivity)});
        out.write("eta_map.csv", t);
        record_sweep(out, s);
    } else if (sw.kind == "rounding") {
        const auto s = experiments::rounding_scan(joint(c, lib), sw.edge_radius_nm, so);
        Csv t({"edge_radius_nm", "eta", "R"});
        for (const auto& p : s.points)
            t.line({fmt(p.coords[0]), num_or_nan(p.result, &experiments::RunResult::eta),
                    num_or_nan(p.result, &experiments::RunResult::reflectivity)});
        out.write("rounding.csv", t);
        record_sweep(out, s);
    } else if (sw.kind == "wavelength") {
        experiments::require_axis(sw.lambda_nm, "lambda_nm");
        experiments::SpectrumSpec spec;
        spec.lambdas_nm = sw.lambda_nm;
        spec.metal_at = [&](double lam) { return lib.metal(c.materials.metal, c.materials.dataset, lam); };
        spec.dielectric = dielectric(c.materials.dielectric_index);
        spec.base = joint(c, lib);
        if (!sw.optimize) spec.fixed_radii = std::pair{c.geometry.r_mw_nm, c.geometry.r_df_nm};
        spec.guess_at = [&](double) { return std::pair{c.geometry.r_mw_nm, c.geometry.r_df_nm}; };
        const auto s = experiments::wavelength_sweep(spec, so, optimize_options(c));
        Csv t({"lambda_nm", "eta", "R", "r_mw_nm", "r_df_nm"});
        for (const auto& p : s.points)
            t.line({fmt(p.coords[0]), num_or_nan(p.result, &experiments::RunResult::eta),
                    num_or_nan(p.result, &experiments::RunResult::reflectivity), fmt(p.r_mw_nm), fmt(p.r_df_nm)});
        out.write("spectrum.csv", t);
        record_sweep(out, s);
    } else {
        const auto s = experiments::index_sweep(
            joint(c, lib), sw.df_index, [&](double) { return std::pair{c.geometry.r_mw_nm, c.geometry.r_df_nm}; }, so,
            optimize_options(c));
        Csv t({"df_index", "eta", "R", "r_mw_nm", "r_df_nm"});
        for (const auto& p : s.points)
            t.line({fmt(p.coords[0]), num_or_nan(p.result, &experiments::RunResult::eta),
                    num_or_nan(p.result, &experiments::RunResult::reflectivity), fmt(p.r_mw_nm), fmt(p.r_df_nm)});
        out.write("index.csv", t);
        record_sweep(out, s);
    }
}

inline void optimize_cmd(const RunConfig& c, ArtifactSet& out)
{
    auto lib = library(c);
    experiments::SweepOptions so;
    so.eta = eta_options(c, out.dir());
    so.threads = c.output.threads;
    const auto r = experiments::optimize_radii(joint(c, lib), c.geometry.r_mw_nm, c.geometry.r_df_nm, so,
                                               optimize_options(c));
    Csv t({"r_mw_nm", "r_df_nm", "eta", "R"});
    for (const auto& e : r.evaluations) t.row({e.r_mw_nm, e.r_df_nm, e.eta, e.reflectivity});
    out.write("optimize.csv", t);
    out.write("result.csv", result_table(r.best));
    out.add_labels(r.best.material_labels);
    auto& m = out.manifest();
    m["seed"] = {{"r_mw_nm", r.seed.r_mw_nm}, {"r_df_nm", r.seed.r_df_nm}, {"eta_estimate", r.seed.eta_estimate}};
    m["best"] = {{"r_mw_nm", r.r_mw_nm}, {"r_df_nm", r.r_df_nm}};
    m["result"] = result_json(r.best);
    m["pitch_nm"] = r.best.grid_pitch_nm;
    m["steady_periods"] = r.best.steady_periods;
}

inline void snom_cmd(const RunConfig& c, ArtifactSet& out)
{
    auto lib = library(c);
    const auto& g = c.geometry;
    geometry::SnomParams p;
    p.df_radius_nm = g.df_radius_nm;
    p.cone_base_radius_nm = g.cone_base_radius_nm;
    p.opening_angle_deg = g.opening_angle_deg;
    p.full_angle = g.full_angle;
    p.apex_radius_nm = g.apex_radius_nm;
    p.tip_substrate_gap_nm = g.tip_substrate_gap_nm;
    p.substrate_index = g.substrate_index;
    p.emitter_depth_nm = g.emitter_depth_nm;
    p.lambda_vac_nm = g.lambda_nm;
    p.metal = lib.metal(c.materials.metal, c.materials.dataset, g.lambda_nm);
    p.dielectric = dielectric(c.materials.dielectric_index);
    experiments::SnomOptions o;
    o.pitch_nm = c.grid.pitch_nm;
    o.courant = c.grid.courant;
    o.pml_cells = c.grid.pml_cells;
    o.ramp_periods = c.source.ramp_periods;
    o.steady = {c.steady.tolerance, c.steady.min_periods, c.steady.max_periods, c.steady.confirm_periods};
    o.box_half_size_nm = c.monitors.box_half_size_nm;
    o.allow_coarse_gap = c.snom.allow_coarse_gap;
    o.snapshots.every_fs = c.snapshots.every_fs;
    o.snapshots.max_count = c.snapshots.max_count;
    o.snapshots.dir = out.dir() / "dumps";
    const auto mode = c.snom.mode == "collect" ? experiments::SnomMode::Collect : experiments::SnomMode::Illuminate;
    const auto r = experiments::snom_run(p, mode, o);
    Csv t({"quantity", "value"});
    if (mode == experiments::SnomMode::Illuminate) {
        t.line({"enhancement", fmt(r.enhancement)});
        t.line({"enhancement_midpoint", fmt(r.enhancement_midpoint)});
    } else {
        t.line({"collection_eta", fmt(r.collection_eta)});
        t.line({"dipole_power", fmt(r.dipole_power)});
    }
    t.line({"mode_power", fmt(r.mode_power)});
    t.line({"steady_periods", fmt(r.steady_periods)});
    t.line({"pitch_nm", fmt(r.pitch_nm)});
    out.write("snom.csv", t);
    out.add_labels(r.material_labels);
    auto& m = out.manifest();
    m["run_digest"] = r.config_digest;
    m["pitch_nm"] = r.pitch_nm;
    m["steady_periods"] = r.steady_periods;
    m["warnings"] = r.warnings;
}

inline void convergence_cmd(const RunConfig& c, ArtifactSet& out)
{
    auto lib = library(c);
    const auto p = joint(c, lib);
    Csv t({"pitch_nm", "eta", "R", "steady_periods"});
    auto& m = out.manifest();
    m["pitch_nm"] = nlohmann::json::array();
    m["steady_periods"] = nlohmann::json::array();
    std::vector<double> etas;
    for (double h : c.convergence.pitches_nm) {
        auto o = eta_options(c, out.dir());
        o.pitch_nm = h;
        const auto r = experiments::measure_eta(p, o);
        log::info("pitch " + fmt(h) + " nm: eta = " + fmt(r.eta));
        t.row({r.grid_pitch_nm, r.eta, r.reflectivity, double(r.steady_periods)});
        etas.push_back(r.eta);
        out.add_labels(r.material_labels);
        m["pitch_nm"].push_back(r.grid_pitch_nm);
        m["steady_periods"].push_back(r.steady_periods);
    }
    out.write("convergence.csv", t);
    // Relative change between the two finest grids, against the coarser one.
    const std::size_t n = etas.size();
    m["relative_change"] = std::abs(etas[n - 1] - etas[n - 2]) / etas[n - 2];
}

}  // namespace detail

/// Machine-readable error record.
inline nlohmann::json error_json(const std::string& kind, const std::string& message)
{
    return {{"error", {{"kind", kind}, {"message", message}}}};
}

/// Runs one subcommand and writes its artifacts and manifest under
/// `c.output.dir`. Returns the process exit status: 0 on success, 2 for
/// configuration errors, 3 for any other library error.
inline int dispatch(const std::string& command, const RunConfig& c, std::ostream& console = std::cout,
                    std::ostream& err = std::cerr)
{
    nlohmann::json failure;
    int status = 0;
    try {
        if (std::find(subcommands().begin(), subcommands().end(), command) == subcommands().end())
            throw Error(ErrorKind::Config, "unknown subcommand '" + command + "'");
        if ((command == "snom") != (c.geometry.kind == "snom"))
            throw Error(ErrorKind::Config, "subcommand '" + command + "' does not accept geometry.kind " +
                                               c.geometry.kind);
        ArtifactSet out(c.output.dir, command, serialize_config(c));
        if (command == "modes") detail::modes_cmd(c, out, console);
        if (command == "match") detail::match_cmd(c, out, console);
        if (command == "run") detail::run_cmd(c, out);
        if (command == "sweep") detail::sweep_cmd(c, out);
        if (command == "optimize") detail::optimize_cmd(c, out);
        if (command == "snom") detail::snom_cmd(c, out);
        if (command == "convergence") detail::convergence_cmd(c, out);
        out.finish();
        return 0;
    } catch (const Error& e) {
        failure = error_json(std::string(to_string(e.kind())), e.what());
        status = e.kind() == ErrorKind::Config ? 2 : 3;
    } catch (const std::exception& e) {
        failure = error_json("internal", e.what());
        status = 3;
    }
    err << failure.dump() << "\n";
    std::error_code ec;
    std::filesystem::create_directories(c.output.dir, ec);
    if (!ec) std::ofstream(std::filesystem::path(c.output.dir) / "error.json") << failure.dump(2) << "\n";
    return status;
}

/// Config text from a YAML file, or the embedded config of a manifest.json.
inline std::string load_config_text(const std::filesystem::path& p)
{
    const auto text = read_file(p);
    if (p.extension() == ".json") {
        try {
            return nlohmann::json::parse(text).at("config").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Config, p.string() + " is not a manifest: " + e.what());
        }
    }
    return text;
}

}  // namespace nc::io
