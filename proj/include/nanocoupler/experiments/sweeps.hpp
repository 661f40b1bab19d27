#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nanocoupler/experiments/butt_joint.hpp"
#include "nanocoupler/experiments/pool.hpp"
#include "nanocoupler/modes/mode_matching.hpp"

namespace nc::experiments {

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepPoint {
    std::vector<double> coords;
    double r_mw_nm = 0.0;
    double r_df_nm = 0.0;
    double lambda_nm = 0.0;
    std::optional<RunResult> result;
    std::string error;  // non-empty marks a failed point
};

inline SweepPoint point_at(std::vector<double> coords)
{
    SweepPoint p;
    p.coords = std::move(coords);
    return p;
}

struct SweepResult {
    std::vector<SweepAxis> axes;
    std::vector<SweepPoint> points;  // row-major over axes
    std::optional<std::size_t> argmax;

    void update_argmax()
    {
        argmax.reset();
        for (std::size_t k = 0; k < points.size(); ++k)
            if (points[k].result && (!argmax || points[k].result->eta > points[*argmax].result->eta)) argmax = k;
    }

    bool complete() const
    {
        for (const auto& p : points)
            if (!p.result) return false;
        return true;
    }

    double min_eta() const
    {
        double m = INFINITY;
        for (const auto& p : points)
            if (p.result) m = std::min(m, p.result->eta);
        return m;
    }
};

struct SweepOptions {
    EtaOptions eta;
    int threads = 1;
    ReferenceCache* cache = nullptr;
};

/// Evaluates each parameter set independently; failures are recorded per point.
inline void evaluate_points(SweepResult& out, const std::vector<ButtJointParams>& params, const SweepOptions& o,
                            const std::function<EtaOptions(const ButtJointParams&)>& options_for = {})
{
    if (params.size() != out.points.size()) throw Error(ErrorKind::Config, "sweep point count mismatch");
    ReferenceCache local;
    ReferenceCache* cache = o.cache ? o.cache : &local;
    parallel_for(params.size(), o.threads, [&](std::size_t k) {
        auto& pt = out.points[k];
        pt.r_mw_nm = params[k].r_mw_nm;
        pt.r_df_nm = params[k].r_df_nm;
        pt.lambda_nm = params[k].lambda_vac_nm;
        try {
            pt.result = measure_eta(params[k], options_for ? options_for(params[k]) : o.eta, cache);
        } catch (const Error& e) {
            pt.error = e.what();
            log::warn("sweep point " + std::to_string(k) + " failed: " + pt.error);
        }
    });
    out.update_argmax();
}

inline void require_axis(const std::vector<double>& v, const std::string& name)
{
    if (v.empty()) throw Error(ErrorKind::Config, "sweep axis '" + name + "' is empty");
}

/// eta and R versus the rounding radius of the wire's end-face edge.
inline SweepResult rounding_scan(const ButtJointParams& base, const std::vector<double>& edge_radii,
                                 const SweepOptions& o)
{
    require_axis(edge_radii, "edge_radius_nm");
    SweepResult out;
    out.axes = {{"edge_radius_nm", edge_radii}};
    std::vector<ButtJointParams> ps;
    for (double e : edge_radii) {
        auto p = base;
        p.edge_radius_nm = e;
        ps.push_back(p);
        out.points.push_back(point_at({e}));
    }
    evaluate_points(out, ps, o);
    return out;
}

/// Full 2D map over wire and fibre radii.
inline SweepResult radius_map(const ButtJointParams& base, const std::vector<double>& r_mw,
                              const std::vector<double>& r_df, const SweepOptions& o)
{
    require_axis(r_mw, "r_mw_nm");
    require_axis(r_df, "r_df_nm");
    SweepResult out;
    out.axes = {{"r_mw_nm", r_mw}, {"r_df_nm", r_df}};
    std::vector<ButtJointParams> ps;
    for (double a : r_mw)
        for (double b : r_df) {
            auto p = base;
            p.r_mw_nm = a;
            p.r_df_nm = b;
            ps.push_back(p);
            out.points.push_back(point_at({a, b}));
        }
    evaluate_points(out, ps, o);
    return out;
}

/// Evenly spaced axis of n points spanning [c (1 - frac), c (1 + frac)].
inline std::vector<double> relative_span(double c, double frac, int n)
{
    std::vector<double> v;
    if (n == 1) return {c};
    for (int k = 0; k < n; ++k) v.push_back(c * (1.0 - frac + 2.0 * frac * k / (n - 1)));
    return v;
}

struct OptimizeOptions {
    double seed_span = 0.2;        // seed search box: +-20 % around the initial guess
    double seed_step_nm = 4.0;
    std::vector<double> steps_nm = {8.0, 2.0};
    int max_moves = 12;            // per step size
};

struct Evaluation {
    double r_mw_nm, r_df_nm;
    double eta;
    double reflectivity;
};

struct OptimizeResult {
    double r_mw_nm = 0.0;
    double r_df_nm = 0.0;
    RunResult best;
    modes::SeedResult seed;
    std::vector<Evaluation> evaluations;
};

/// Mode-matching seed followed by a 3x3 FDTD pattern search around the
/// current best, first with coarse then fine radius steps.
inline OptimizeResult optimize_radii(const ButtJointParams& base, double guess_r_mw, double guess_r_df,
                                     const SweepOptions& so, const OptimizeOptions& oo = {})
{
    const double df_index = std::sqrt(base.dielectric.eps_static());
    modes::SearchBox box{guess_r_mw * (1.0 - oo.seed_span), guess_r_mw * (1.0 + oo.seed_span),
                         guess_r_df * (1.0 - oo.seed_span), guess_r_df * (1.0 + oo.seed_span), oo.seed_step_nm};
    OptimizeResult res;
    res.seed = modes::seed_radii(base.metal, df_index, base.lambda_vac_nm, box);
    log::info("seed radii " + fmt(res.seed.r_mw_nm) + " / " + fmt(res.seed.r_df_nm) + " nm, overlap estimate " +
              fmt(res.seed.eta_estimate));

    ReferenceCache local;
    SweepOptions o = so;
    if (!o.cache) o.cache = &local;
    std::map<std::pair<double, double>, std::optional<RunResult>> seen;

    auto evaluate = [&](const std::vector<std::pair<double, double>>& pts) {
        std::vector<std::pair<double, double>> todo;
        for (const auto& p : pts)
            if (!seen.count(p) && p.first > 0.0 && p.second > 0.0) todo.push_back(p);
        SweepResult tmp;
        std::vector<ButtJointParams> ps;
        for (const auto& [a, b] : todo) {
            auto p = base;
            p.r_mw_nm = a;
            p.r_df_nm = b;
            ps.push_back(p);
            tmp.points.push_back(point_at({a, b}));
        }
        evaluate_points(tmp, ps, o);
        for (std::size_t k = 0; k < todo.size(); ++k) {
            seen[todo[k]] = tmp.points[k].result;
            if (tmp.points[k].result)
                res.evaluations.push_back(
                    {todo[k].first, todo[k].second, tmp.points[k].result->eta, tmp.points[k].result->reflectivity});
        }
    };
    auto eta_of = [&](const std::pair<double, double>& p) {
        const auto it = seen.find(p);
        return it != seen.end() && it->second ? it->second->eta : -1.0;
    };

    std::pair<double, double> center{res.seed.r_mw_nm, res.seed.r_df_nm};
    for (double step : oo.steps_nm) {
        for (int move = 0; move < oo.max_moves; ++move) {
            std::vector<std::pair<double, double>> pts;
            for (int a = -1; a <= 1; ++a)
                for (int b = -1; b <= 1; ++b) pts.push_back({center.first + a * step, center.second + b * step});
            evaluate(pts);
            auto best = center;
            for (const auto& p : pts)
                if (eta_of(p) > eta_of(best)) best = p;  // strict: ties keep the current centre
            if (best == center) break;
            center = best;
        }
    }
    if (eta_of(center) < 0.0) throw Error(ErrorKind::Convergence, "no successful FDTD evaluation during optimisation");
    res.r_mw_nm = center.first;
    res.r_df_nm = center.second;
    res.best = *seen[center];
    return res;
}

/// Per-wavelength material and geometry provider for spectra.
struct SpectrumSpec {
    std::vector<double> lambdas_nm;
    std::function<materials::MaterialModel(double)> metal_at;
    materials::MaterialModel dielectric = materials::MaterialModel::dielectric(1.45, "silica");
    std::optional<std::pair<double, double>> fixed_radii;        // (r_mw, r_df); otherwise optimise per wavelength
    std::function<std::pair<double, double>(double)> guess_at;  // initial radii guess for the optimiser
    std::function<double(double)> pitch_at;                     // grid pitch per wavelength
    ButtJointParams base;
};

inline SweepResult wavelength_sweep(const SpectrumSpec& spec, const SweepOptions& so,
                                    const OptimizeOptions& oo = {})
{
    require_axis(spec.lambdas_nm, "lambda_nm");
    SweepResult out;
    out.axes = {{"lambda_nm", spec.lambdas_nm}};
    auto options_for = [&](double lam) {
        EtaOptions e = so.eta;
        if (spec.pitch_at) e.pitch_nm = spec.pitch_at(lam);
        return e;
    };
    auto params_for = [&](double lam) {
        auto p = spec.base;
        p.lambda_vac_nm = lam;
        p.metal = spec.metal_at(lam);
        p.dielectric = spec.dielectric;
        p.launch_length_nm = p.receive_length_nm = p.r_max_nm = 0.0;
        return p;
    };

    if (spec.fixed_radii) {
        std::vector<ButtJointParams> ps;
        for (double lam : spec.lambdas_nm) {
            auto p = params_for(lam);
            p.r_mw_nm = spec.fixed_radii->first;
            p.r_df_nm = spec.fixed_radii->second;
            ps.push_back(p);
            out.points.push_back(point_at({lam}));
        }
        evaluate_points(out, ps, so, [&](const ButtJointParams& p) { return options_for(p.lambda_vac_nm); });
        return out;
    }

    for (double lam : spec.lambdas_nm) {
        auto pt = point_at({lam});
        pt.lambda_nm = lam;
        try {
            auto p = params_for(lam);
            const auto g = spec.guess_at ? spec.guess_at(lam) : std::pair{p.r_mw_nm, p.r_df_nm};
            SweepOptions o = so;
            o.eta = options_for(lam);
            const auto r = optimize_radii(p, g.first, g.second, o, oo);
            pt.r_mw_nm = r.r_mw_nm;
            pt.r_df_nm = r.r_df_nm;
            pt.result = r.best;
        } catch (const Error& e) {
            pt.error = e.what();
            log::warn("wavelength " + fmt(lam) + " nm failed: " + pt.error);
        }
        out.points.push_back(pt);
    }
    out.update_argmax();
    return out;
}

/// Optimised radii versus the fibre index at one wavelength.
inline SweepResult index_sweep(const ButtJointParams& base, const std::vector<double>& indices,
                               const std::function<std::pair<double, double>(double)>& guess_at,
                               const SweepOptions& so, const OptimizeOptions& oo = {})
{
    require_axis(indices, "df_index");
    SweepResult out;
    out.axes = {{"df_index", indices}};
    for (double n : indices) {
        auto pt = point_at({n});
        pt.lambda_nm = base.lambda_vac_nm;
        try {
            if (n < 1.2) throw Error(ErrorKind::Domain, "fibre index must be >= 1.2");
            auto p = base;
            p.dielectric = materials::MaterialModel::dielectric(n, "n=" + fmt(n));
            const auto g = guess_at(n);
            const auto r = optimize_radii(p, g.first, g.second, so, oo);
            pt.r_mw_nm = r.r_mw_nm;
            pt.r_df_nm = r.r_df_nm;
            pt.result = r.best;
        } catch (const Error& e) {
            pt.error = e.what();
            log::warn("index " + fmt(n) + " failed: " + pt.error);
        }
        out.points.push_back(pt);
    }
    out.update_argmax();
    return out;
}

}  // namespace nc::experiments
