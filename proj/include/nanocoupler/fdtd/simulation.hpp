#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/core/units.hpp"
#include "nanocoupler/geometry/rasterize.hpp"

namespace nc::fdtd {

using geometry::GridSpec;

struct PmlParams {
    int cells = 10;
    double order = 3.0;
    double sigma_factor = 0.8;  // sigma_max = sigma_factor (order + 1) / h
    double alpha = -1.0;        // CFS alpha in internal units; < 0 selects 0.05 omega
    bool r_max = true;
    bool z_lo = true;
    bool z_hi = true;
};

struct SimParams {
    double lambda_nm = 633.0;  // sets the period and the per-period step count
    double courant = 0.5;      // fraction of the 2D stability limit
    PmlParams pml;
};

/// Dense 2D array, row-major in r with z contiguous.
struct Field2D {
    int n_r = 0, n_z = 0;
    std::vector<double> v;

    Field2D() = default;
    Field2D(int nr, int nz) : n_r(nr), n_z(nz), v(static_cast<std::size_t>(nr) * nz, 0.0) {}
    double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * n_z + j]; }
    double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * n_z + j]; }
    double* row(int i) { return v.data() + static_cast<std::size_t>(i) * n_z; }
    const double* row(int i) const { return v.data() + static_cast<std::size_t>(i) * n_z; }
};

/// Recursive-convolution coefficients psi <- b psi + a d, for one position.
struct CpmlCoef {
    double b = 1.0;
    double a = 0.0;

    /// Effective 1/s at angular frequency w for the discrete recursion, with
    /// the derivative and psi sampled at the same time level.
    Complex inv_stretch(double w, double dt) const
    {
        if (a == 0.0) return 1.0;
        const Complex z = std::exp(Complex(0.0, -w * dt));
        return 1.0 + a * z / (z - b);
    }
};

inline CpmlCoef make_cpml(double sigma, double alpha, double dt)
{
    if (sigma <= 0.0) return {};
    const double b = std::exp(-(sigma + alpha) * dt);
    return {b, sigma / (sigma + alpha) * (b - 1.0)};
}

struct MetalUpdate {
    std::uint32_t index;
    double ca;  // E multiplier
    double cj;  // cb (1 + kp) / 2
    double kp;
    double bp;
};

class Simulation;

/// Source callbacks. `after_h` runs once H^{n+1/2} is computed from E^n,
/// `after_e` once E^{n+1} is computed but before the Drude current update.
/// Source callbacks: `begin` once per step, then per grid row after that
/// row's H update (`h_row`) and after its E update (`e_row`).
struct StepHook {
    std::function<void(Simulation&)> begin;
    std::function<void(Simulation&, int)> h_row;
    std::function<void(Simulation&, int)> e_row;
};

/// m = 0 TM body-of-revolution FDTD engine (Er, Ez, Hphi) in internal units
/// (nm, c = 1, H scaled by eta0).
class Simulation {
public:
    Simulation(const geometry::RasterizedMedium& medium, const SimParams& p)
        : medium_(medium), g_(medium.grid), params_(p)
    {
        const double h = g_.pitch_nm;
        omega_ = omega_internal(p.lambda_nm);
        const double period = 2.0 * pi / omega_;
        if (!(p.courant > 0.0)) throw Error(ErrorKind::Domain, "courant factor must be positive");
        const double dt_max = p.courant * h / std::sqrt(2.0);
        steps_per_period_ = static_cast<int>(std::ceil(period / dt_max));
        dt_ = period / steps_per_period_;

        er = Field2D(g_.nr, g_.nz + 1);
        ez = Field2D(g_.nr + 1, g_.nz);
        hp = Field2D(g_.nr, g_.nz);

        setup_media();
        setup_pml();
    }

    const GridSpec& grid() const { return g_; }
    const geometry::RasterizedMedium& medium() const { return medium_; }
    const SimParams& params() const { return params_; }
    double dt() const { return dt_; }
    double omega() const { return omega_; }
    int steps_per_period() const { return steps_per_period_; }
    long step_index() const { return n_; }
    double time_e() const { return n_ * dt_; }           // time of the stored E
    double time_h() const { return (n_ - 0.5) * dt_; }   // time of the stored H
    int pml_cells() const { return params_.pml.cells; }
    double pml_alpha() const { return alpha_; }

    const Field2D& cb_er() const { return cb_r_; }
    const Field2D& cb_ez() const { return cb_z_; }

    /// Discrete permittivity seen by the scheme at angular frequency w for a
    /// cell of component `er_comp` (true: Er, false: Ez).
    Complex eps_discrete(bool er_comp, std::size_t k, double w) const
    {
        const auto& c = er_comp ? medium_.er : medium_.ez;
        const double einf = c.eps_inf[k];
        auto it = std::lower_bound(c.metal.begin(), c.metal.end(), k,
                                   [](const geometry::MetalCell& m, std::size_t idx) { return m.index < idx; });
        if (it == c.metal.end() || it->index != k) return einf;
        return eps_discrete_drude(einf, it->wp2, it->gamma, it->sigma, w);
    }

    Complex eps_discrete_drude(double einf, double wp2, double gamma, double sigma, double w) const
    {
        const double kp = (1.0 - 0.5 * gamma * dt_) / (1.0 + 0.5 * gamma * dt_);
        const double bp = 0.5 * wp2 * dt_ / (1.0 + 0.5 * gamma * dt_);
        const Complex z = std::exp(Complex(0.0, -w * dt_));
        const Complex chi = bp * (z + 1.0) / (z - kp) + sigma;
        const double wt = 2.0 / dt_ * std::sin(0.5 * w * dt_);
        return einf + I * std::cos(0.5 * w * dt_) * chi / wt;
    }

    /// Numerical angular frequency 2/dt sin(w dt / 2).
    double omega_tilde(double w) const { return 2.0 / dt_ * std::sin(0.5 * w * dt_); }

    // PML coefficients by position, used by the discrete mode solver.
    const CpmlCoef& pml_r_e(int i) const { return cr_e_[i]; }    // Ez at r = i h
    const CpmlCoef& pml_r_h(int i) const { return cr_h_[i]; }    // Hphi at r = (i + 1/2) h
    const CpmlCoef& pml_r_bar(int i) const { return cr_bar_[i]; }  // 1/r stretching at r = i h
    int pml_r_start() const { return ir0_; }
    int pml_z_lo_end() const { return params_.pml.z_lo ? params_.pml.cells : 0; }
    int pml_z_hi_start() const { return params_.pml.z_hi ? g_.nz - params_.pml.cells : g_.nz; }

    void add_hook(StepHook h) { hooks_.push_back(std::move(h)); }

    /// Extra soft currents added to Ez before the Drude post-pass:
    /// list of (flat Ez index, J value) filled by sources each step.
    std::vector<std::pair<std::size_t, double>>& ez_currents() { return ez_currents_; }

    void step()
    {
        for (auto& hk : hooks_)
            if (hk.begin) hk.begin(*this);
        std::sort(ez_currents_.begin(), ez_currents_.end());
        sweep();
        ez_currents_.clear();
        ++n_;
    }

    /// NaN/Inf scan; throws a numerical blow-up error naming the step.
    void check_finite() const
    {
        for (const auto* f : {&er, &ez, &hp})
            for (double x : f->v)
                if (!std::isfinite(x))
                    throw Error(ErrorKind::NumericalBlowup, "non-finite field at step " + std::to_string(n_),
                                {static_cast<double>(n_)});
    }

    /// Discrete electromagnetic energy (per 2 pi, internal units) at the stored
    /// time level n: 1/2 sum eps E^n E^n dV + 1/2 sum H^{n-1/2} H^{n+1/2} dV plus
    /// the Drude kinetic term. H^{n+1/2} is predicted from the bulk curl, so the
    /// value is exact only outside PML cells and with sources idle.
    double energy() const
    {
        const double h = g_.pitch_nm;
        const double c = dt_ / h;
        double w = 0.0;
        for (int i = 0; i < g_.nr; ++i) {
            const double r = g_.r_er(i) * h * h;
            for (int j = 0; j <= g_.nz; ++j) w += 0.5 * medium_.er.eps_inf[std::size_t(i) * (g_.nz + 1) + j] * r * er(i, j) * er(i, j);
            for (int j = 0; j < g_.nz; ++j) {
                const double next = hp(i, j) + c * (ez(i + 1, j) - ez(i, j) - er(i, j + 1) + er(i, j));
                w += 0.5 * r * hp(i, j) * next;
            }
        }
        for (int i = 0; i <= g_.nr; ++i) {
            const double r = (i == 0 ? 0.125 * h : g_.r_ez(i)) * h * h;
            for (int j = 0; j < g_.nz; ++j) w += 0.5 * medium_.ez.eps_inf[std::size_t(i) * g_.nz + j] * r * ez(i, j) * ez(i, j);
        }
        auto kinetic = [&](const std::vector<geometry::MetalCell>& cells, const std::vector<double>& j, bool is_r) {
            double s = 0.0;
            for (std::size_t k = 0; k < cells.size(); ++k) {
                if (cells[k].wp2 <= 0.0) continue;
                const std::size_t idx = cells[k].index;
                const int i = static_cast<int>(idx / (is_r ? g_.nz + 1 : g_.nz));
                const double r = is_r ? g_.r_er(i) : (i == 0 ? 0.125 * h : g_.r_ez(i));
                s += 0.5 * j[k] * j[k] / cells[k].wp2 * r * h * h;
            }
            return s;
        };
        return w + kinetic(medium_.er.metal, jr_, true) + kinetic(medium_.ez.metal, jz_, false);
    }

    Field2D er, ez, hp;

private:
    void setup_media()
    {
        const double h = g_.pitch_nm;
        (void)h;
        auto build = [&](const geometry::ComponentMedium& c, Field2D& cb, std::vector<MetalUpdate>& mu,
                         std::vector<double>& j, std::vector<double>& eold,
                         std::vector<std::size_t>& rows) {
            cb = Field2D(c.n_r, c.n_z);
            for (std::size_t k = 0; k < c.size(); ++k) cb.v[k] = dt_ / c.eps_inf[k];
            mu.clear();
            for (const auto& m : c.metal) {
                const double kp = (1.0 - 0.5 * m.gamma * dt_) / (1.0 + 0.5 * m.gamma * dt_);
                const double bp = 0.5 * m.wp2 * dt_ / (1.0 + 0.5 * m.gamma * dt_);
                const double einf = c.eps_inf[m.index];
                const double den = einf / dt_ + 0.5 * bp + 0.5 * m.sigma;
                const double num = einf / dt_ - 0.5 * bp - 0.5 * m.sigma;
                cb.v[m.index] = 1.0 / den;
                mu.push_back({m.index, num / den, 0.5 * (1.0 + kp) / den, kp, bp});
            }
            j.assign(mu.size(), 0.0);
            eold.assign(mu.size(), 0.0);
            rows.assign(g_.nr + 1, mu.size());
            for (int i = g_.nr; i >= 0; --i) {
                const std::size_t lo = std::size_t(i) * c.n_z;
                while (rows[i] > 0 && mu[rows[i] - 1].index >= lo) --rows[i];
                if (i > 0) rows[i - 1] = rows[i];
            }
        };
        build(medium_.er, cb_r_, metal_r_, jr_, eold_r_, row_r_);
        build(medium_.ez, cb_z_, metal_z_, jz_, eold_z_, row_z_);

        // Ez radial coefficients: (1/r) d(r H)/dr = cp H_i - cm H_{i-1}.
        cp_.assign(g_.nr + 1, 0.0);
        cm_.assign(g_.nr + 1, 0.0);
        cp_[0] = 4.0 / h;
        for (int i = 1; i <= g_.nr; ++i) {
            const double r = g_.r_ez(i);
            cp_[i] = (r + 0.5 * h) / (r * h);
            cm_[i] = (r - 0.5 * h) / (r * h);
        }
    }

    void setup_pml()
    {
        const auto& pp = params_.pml;
        const double h = g_.pitch_nm;
        const int n = pp.cells;
        alpha_ = pp.alpha >= 0.0 ? pp.alpha : 0.05 * omega_;
        const double smax = pp.sigma_factor * (pp.order + 1.0) / h;
        const double d = n * h;
        auto sigma_at = [&](double x) { return x <= 0.0 ? 0.0 : smax * std::pow(std::min(x, d) / d, pp.order); };
        // Integral of sigma from the PML start.
        auto sigma_int = [&](double x) {
            return x <= 0.0 ? 0.0 : smax * d / (pp.order + 1.0) * std::pow(std::min(x, d) / d, pp.order + 1.0);
        };

        cr_e_.assign(g_.nr + 1, {});
        cr_h_.assign(g_.nr, {});
        cr_bar_.assign(g_.nr + 1, {});
        ir0_ = g_.nr;
        if (pp.r_max && n > 0) {
            const double r0 = (g_.nr - n) * h;
            ir0_ = g_.nr - n;
            for (int i = 0; i <= g_.nr; ++i) {
                const double r = g_.r_ez(i);
                cr_e_[i] = make_cpml(sigma_at(r - r0), alpha_, dt_);
                if (r > r0) cr_bar_[i] = make_cpml(sigma_int(r - r0) / r, alpha_, dt_);
            }
            for (int i = 0; i < g_.nr; ++i) cr_h_[i] = make_cpml(sigma_at(g_.r_er(i) - r0), alpha_, dt_);
            psi_hr_ = Field2D(n, g_.nz);
            psi_ez_r_ = Field2D(n, g_.nz);
            psi_ez_bar_ = Field2D(n, g_.nz);
        }

        cz_e_.assign(g_.nz + 1, {});
        cz_h_.assign(g_.nz, {});
        const double zlo = n * h, zhi = (g_.nz - n) * h;
        for (int j = 0; j <= g_.nz; ++j) {
            const double z = j * h;
            double x = 0.0;
            if (pp.z_lo) x = std::max(x, zlo - z);
            if (pp.z_hi) x = std::max(x, z - zhi);
            cz_e_[j] = make_cpml(sigma_at(x), alpha_, dt_);
        }
        for (int j = 0; j < g_.nz; ++j) {
            const double z = (j + 0.5) * h;
            double x = 0.0;
            if (pp.z_lo) x = std::max(x, zlo - z);
            if (pp.z_hi) x = std::max(x, z - zhi);
            cz_h_[j] = make_cpml(sigma_at(x), alpha_, dt_);
        }
        if (n > 0 && (pp.z_lo || pp.z_hi)) {
            psi_hz_lo_ = Field2D(g_.nr, n);
            psi_hz_hi_ = Field2D(g_.nr, n);
            psi_erz_lo_ = Field2D(g_.nr, n + 1);
            psi_erz_hi_ = Field2D(g_.nr, n + 1);
        }
    }

    // One pass over the rows: H of row i, then the E components that depend
    // only on H rows <= i. Per-cell arithmetic is the same as separate sweeps.
    void sweep()
    {
        const double c = dt_ / g_.pitch_nm;
        const double inv_h = 1.0 / g_.pitch_nm;
        const int nz = g_.nz;
        const auto& pp = params_.pml;
        const int n = pp.cells;
        const bool zl = n > 0 && pp.z_lo, zh = n > 0 && pp.z_hi;
        const bool rp = n > 0 && pp.r_max;
        std::size_t cur = 0;

        for (int i = 0; i < g_.nr; ++i) {
            {
                double* __restrict h = hp.row(i);
                const double* __restrict e0 = ez.row(i);
                const double* __restrict e1 = ez.row(i + 1);
                const double* __restrict r = er.row(i);
                for (int j = 0; j < nz; ++j) h[j] += c * (e1[j] - e0[j] - r[j + 1] + r[j]);
                if (zl)
                    for (int j = 0; j < n; ++j) {
                        double& psi = psi_hz_lo_(i, j);
                        psi = cz_h_[j].b * psi + cz_h_[j].a * (r[j + 1] - r[j]) * inv_h;
                        h[j] -= dt_ * psi;
                    }
                if (zh)
                    for (int jj = 0; jj < n; ++jj) {
                        const int j = nz - n + jj;
                        double& psi = psi_hz_hi_(i, jj);
                        psi = cz_h_[j].b * psi + cz_h_[j].a * (r[j + 1] - r[j]) * inv_h;
                        h[j] -= dt_ * psi;
                    }
                if (rp && i >= ir0_) {
                    const auto& cf = cr_h_[i];
                    double* __restrict psi = psi_hr_.row(i - ir0_);
                    for (int j = 0; j < nz; ++j) {
                        psi[j] = cf.b * psi[j] + cf.a * (e1[j] - e0[j]) * inv_h;
                        h[j] += dt_ * psi[j];
                    }
                }
            }
            for (auto& hk : hooks_)
                if (hk.h_row) hk.h_row(*this, i);

            metal_pre(er, metal_r_, row_r_[i], row_r_[i + 1], jr_, eold_r_);
            metal_pre(ez, metal_z_, row_z_[i], row_z_[i + 1], jz_, eold_z_);

            // Er, interior z planes; j = 0 and j = nz are PEC.
            {
                double* __restrict e = er.row(i);
                const double* __restrict cb = cb_r_.row(i);
                const double* __restrict h = hp.row(i);
                for (int j = 1; j < nz; ++j) e[j] -= cb[j] * (h[j] - h[j - 1]) * inv_h;
                if (zl)
                    for (int j = 1; j <= n; ++j) {
                        double& psi = psi_erz_lo_(i, j);
                        psi = cz_e_[j].b * psi + cz_e_[j].a * (h[j] - h[j - 1]) * inv_h;
                        e[j] -= cb[j] * psi;
                    }
                if (zh)
                    for (int jj = 0; jj < n; ++jj) {
                        const int j = nz - n + jj;
                        if (j < 1) continue;
                        double& psi = psi_erz_hi_(i, jj);
                        psi = cz_e_[j].b * psi + cz_e_[j].a * (h[j] - h[j - 1]) * inv_h;
                        e[j] -= cb[j] * psi;
                    }
            }
            // Ez; row nr is PEC.
            {
                double* __restrict e = ez.row(i);
                const double* __restrict cb = cb_z_.row(i);
                const double* __restrict h1 = hp.row(i);
                if (i == 0) {
                    const double c0 = cp_[0];
                    for (int j = 0; j < nz; ++j) e[j] += cb[j] * c0 * h1[j];
                } else {
                    const double* __restrict h0 = hp.row(i - 1);
                    const double a = cp_[i], b = cm_[i];
                    for (int j = 0; j < nz; ++j) e[j] += cb[j] * (a * h1[j] - b * h0[j]);
                    if (rp && i >= ir0_) {
                        const auto& ce = cr_e_[i];
                        const auto& cbar = cr_bar_[i];
                        const double rinv = 1.0 / g_.r_ez(i);
                        double* __restrict psi = psi_ez_r_.row(i - ir0_);
                        double* __restrict psib = psi_ez_bar_.row(i - ir0_);
                        for (int j = 0; j < nz; ++j) {
                            psi[j] = ce.b * psi[j] + ce.a * (h1[j] - h0[j]) * inv_h;
                            psib[j] = cbar.b * psib[j] + cbar.a * 0.5 * (h1[j] + h0[j]);
                            e[j] += cb[j] * (psi[j] + psib[j] * rinv);
                        }
                    }
                }
            }
            for (auto& hk : hooks_)
                if (hk.e_row) hk.e_row(*this, i);

            const std::size_t row_end = std::size_t(i + 1) * nz;
            for (; cur < ez_currents_.size() && ez_currents_[cur].first < row_end; ++cur) {
                const auto [k, jv] = ez_currents_[cur];
                ez.v[k] -= cb_z_.v[k] * jv;
            }

            metal_post(er, metal_r_, row_r_[i], row_r_[i + 1], jr_, eold_r_);
            metal_post(ez, metal_z_, row_z_[i], row_z_[i + 1], jz_, eold_z_);
        }
    }

    static void metal_pre(Field2D& e, const std::vector<MetalUpdate>& mu, std::size_t k0, std::size_t k1,
                          const std::vector<double>& j, std::vector<double>& eold)
    {
        for (std::size_t k = k0; k < k1; ++k) {
            double& x = e.v[mu[k].index];
            eold[k] = x;
            x = mu[k].ca * x - mu[k].cj * j[k];
        }
    }

    static void metal_post(const Field2D& e, const std::vector<MetalUpdate>& mu, std::size_t k0, std::size_t k1,
                           std::vector<double>& j, const std::vector<double>& eold)
    {
        for (std::size_t k = k0; k < k1; ++k) j[k] = mu[k].kp * j[k] + mu[k].bp * (e.v[mu[k].index] + eold[k]);
    }

    geometry::RasterizedMedium medium_;
    GridSpec g_;
    SimParams params_;
    double omega_ = 0.0;
    double dt_ = 0.0;
    int steps_per_period_ = 0;
    long n_ = 0;
    double alpha_ = 0.0;

    Field2D cb_r_, cb_z_;
    std::vector<double> cp_, cm_;
    std::vector<MetalUpdate> metal_r_, metal_z_;
    std::vector<double> jr_, jz_, eold_r_, eold_z_;
    std::vector<std::size_t> row_r_, row_z_;  // first metal entry of each row

    std::vector<CpmlCoef> cr_e_, cr_h_, cr_bar_, cz_e_, cz_h_;
    int ir0_ = 0;
    Field2D psi_hr_, psi_ez_r_, psi_ez_bar_;
    Field2D psi_hz_lo_, psi_hz_hi_, psi_erz_lo_, psi_erz_hi_;

    std::vector<StepHook> hooks_;
    std::vector<std::pair<std::size_t, double>> ez_currents_;
};

}  // namespace nc::fdtd
