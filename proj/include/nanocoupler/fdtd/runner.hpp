#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nanocoupler/core/log.hpp"
#include "nanocoupler/fdtd/monitors.hpp"

namespace nc::fdtd {

struct SteadyCriterion {
    double tolerance = 1e-3;  // relative flux change between consecutive periods; 0 disables early stop
    int min_periods = 10;
    int max_periods = 200;
    int confirm_periods = 3;  // consecutive periods that must each meet the tolerance
};

struct RunRecord {
    int periods = 0;             // periods completed, including the measurement period
    bool converged = false;
    std::vector<std::vector<double>> flux_history;  // [plane][period]
    long steps = 0;
};

/// Steps a CW-driven simulation one optical period at a time until the flux
/// through every plane in `flux_planes` settles, then runs one more period with
/// `measure` accumulating. With tolerance 0 it runs exactly max_periods and
/// the last period is the measurement.
inline RunRecord run_until_steady(Simulation& sim, const std::vector<PlaneMonitor>& flux_planes, Lockin& flux_lockin,
                                  Lockin& measure, const SteadyCriterion& crit,
                                  const std::function<void(const Simulation&)>& on_step = {})
{
    if (crit.max_periods < 1) throw Error(ErrorKind::Config, "max_periods must be positive");
    RunRecord rec;
    rec.flux_history.resize(flux_planes.size());
    const int n = sim.steps_per_period();
    const auto& g = sim.grid();
    bool measuring = false;
    int quiet = 0;

    for (int p = 0; p < crit.max_periods || measuring; ++p) {
        const bool last_allowed = p == crit.max_periods - 1;
        if (crit.tolerance == 0.0 && last_allowed) measuring = true;
        for (int s = 0; s < n; ++s) {
            sim.step();
            flux_lockin.accumulate(sim);
            if (measuring) measure.accumulate(sim);
            if (on_step) on_step(sim);
        }
        sim.check_finite();
        flux_lockin.finish_period();
        rec.periods = p + 1;
        rec.steps = sim.step_index();
        if (measuring) {
            measure.finish_period();
            rec.converged = crit.tolerance > 0.0;
            return rec;
        }

        bool settled = crit.tolerance > 0.0;
        for (std::size_t k = 0; k < flux_planes.size(); ++k) {
            const double f = flux_planes[k].flux(flux_lockin, g);
            auto& hist = rec.flux_history[k];
            if (!hist.empty()) {
                const double prev = hist.back();
                if (!(std::abs(f - prev) <= crit.tolerance * std::abs(f))) settled = false;
            } else {
                settled = false;
            }
            hist.push_back(f);
        }
        quiet = settled ? quiet + 1 : 0;
        if (p + 1 >= crit.min_periods && quiet >= std::max(1, crit.confirm_periods)) measuring = true;
    }
    std::vector<double> trace = rec.flux_history.empty() ? std::vector<double>{} : rec.flux_history.front();
    throw Error(ErrorKind::NonConvergence,
                "flux did not settle within " + std::to_string(crit.max_periods) + " periods", trace);
}

}  // namespace nc::fdtd
