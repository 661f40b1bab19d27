#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "nanocoupler/fdtd/simulation.hpp"
#include "nanocoupler/geometry/scene.hpp"

namespace nc::fdtd {

using geometry::Direction;

/// Raised-cosine turn-on over `periods` optical periods.
inline double ramp(double t, double period, double periods)
{
    if (periods <= 0.0) return t >= 0.0 ? 1.0 : 0.0;
    const double tr = periods * period;
    if (t <= 0.0) return 0.0;
    if (t >= tr) return 1.0;
    return 0.5 * (1.0 - std::cos(pi * t / tr));
}

/// Guided mode of the discretised cross-section at one Er plane. Phasors are
/// referred to each component's own z position, with dependence e^{i(K z - w t)}.
struct DiscreteMode {
    int plane_j = 0;
    Complex k2;          // eigenvalue K^2
    Complex kz;          // K = 2/h sin(beta h / 2)
    Complex beta;        // discrete propagation constant
    std::vector<Complex> er;    // nr, at r = (i + 1/2) h
    std::vector<Complex> ez;    // nr + 1, at r = i h
    std::vector<Complex> hphi;  // nr, at r = (i + 1/2) h
    double grid_power = 0.0;    // 1/2 Re sum Er Hphi* 2 pi r h (internal units)

    double n_eff(double lambda_nm) const { return beta.real() * lambda_nm / (2.0 * pi); }
};

namespace detail {

/// Solves a complex tridiagonal system in place (Thomas algorithm).
inline void thomas(std::vector<Complex> a, std::vector<Complex> b, std::vector<Complex> c, std::vector<Complex>& d)
{
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const Complex m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

}  // namespace detail

/// Grid eigenmode of the cross-section at Er plane `j`, including the radial
/// CPML stretching, found by shifted inverse iteration from `beta_guess`.
/// The result reproduces the discrete update equations exactly, which keeps
/// TF/SF leakage at the ramp-transient level.
inline DiscreteMode solve_discrete_mode(const Simulation& sim, int j, Complex beta_guess,
                                        const std::vector<Complex>* start = nullptr, double w = 0.0)
{
    const auto& g = sim.grid();
    const double h = g.pitch_nm;
    const int nr = g.nr;
    if (j < 1 || j >= g.nz) throw Error(ErrorKind::Config, "mode plane outside the grid");
    if (w == 0.0) w = sim.omega();
    const double wt = sim.omega_tilde(w);
    const double dt = sim.dt();

    std::vector<Complex> eps_r(nr), eps_z(nr + 1), sh(nr), gp(nr + 1), gm(nr + 1);
    for (int i = 0; i < nr; ++i) {
        eps_r[i] = sim.eps_discrete(true, static_cast<std::size_t>(i) * (g.nz + 1) + j, w);
        sh[i] = sim.pml_r_h(i).inv_stretch(w, dt);
    }
    for (int i = 0; i <= nr; ++i) eps_z[i] = sim.eps_discrete(false, static_cast<std::size_t>(i) * g.nz + j, w);
    gp[0] = 4.0 / h;
    for (int i = 1; i <= nr; ++i) {
        const Complex se = sim.pml_r_e(i).inv_stretch(w, dt);
        const Complex sb = sim.pml_r_bar(i).inv_stretch(w, dt);
        gp[i] = se / h + sb / (2.0 * g.r_ez(i));
        gm[i] = -se / h + sb / (2.0 * g.r_ez(i));
    }

    std::vector<Complex> lo(nr, 0.0), di(nr, 0.0), up(nr, 0.0);
    for (int i = 0; i < nr; ++i) {
        const Complex f = eps_r[i] * sh[i] / h;
        di[i] = eps_r[i] * wt * wt - f * gp[i] / eps_z[i];
        if (i + 1 < nr) {
            di[i] += f * gm[i + 1] / eps_z[i + 1];
            up[i] = f * gp[i + 1] / eps_z[i + 1];
        }
        if (i > 0) lo[i] = -f * gm[i] / eps_z[i];
    }

    const Complex k0 = 2.0 / h * std::sin(0.5 * beta_guess * h);
    Complex shift = k0 * k0;
    std::vector<Complex> x(nr, 1.0);
    if (start && static_cast<int>(start->size()) == nr) x = *start;

    auto normalise = [](std::vector<Complex>& v) {
        double m = 0.0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (std::abs(v[i]) > m) {
                m = std::abs(v[i]);
                k = i;
            }
        const Complex s = v[k];
        for (auto& e : v) e /= s;
    };
    normalise(x);

    Complex lambda = shift;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        std::vector<Complex> y = x;
        std::vector<Complex> d(nr);
        for (int i = 0; i < nr; ++i) d[i] = di[i] - shift;
        detail::thomas(lo, d, up, y);
        // Rayleigh-type estimate: x ~ (lambda - shift) y
        Complex num = 0.0, den = 0.0;
        for (int i = 0; i < nr; ++i) {
            num += std::conj(y[i]) * x[i];
            den += std::conj(y[i]) * y[i];
        }
        const Complex next = shift + num / den;
        x = y;
        normalise(x);
        const double change = std::abs(next - lambda) / std::abs(next);
        lambda = next;
        if (it >= 3 && it % 3 == 0 && change < 1e-6) shift = lambda;  // accelerate once locked on
        if (it >= 2 && change < 1e-15) {
            converged = true;
            break;
        }
    }
    // Residual of the final pair.
    double res = 0.0, nrm = 0.0;
    for (int i = 0; i < nr; ++i) {
        Complex ax = di[i] * x[i];
        if (i > 0) ax += lo[i] * x[i - 1];
        if (i + 1 < nr) ax += up[i] * x[i + 1];
        res = std::max(res, std::abs(ax - lambda * x[i]));
        nrm = std::max(nrm, std::abs(lambda * x[i]));
    }
    if (!converged && res > 1e-9 * nrm)
        throw Error(ErrorKind::Convergence, "discrete mode inverse iteration did not converge",
                    {lambda.real(), lambda.imag(), res / nrm});

    DiscreteMode m;
    m.plane_j = j;
    m.k2 = lambda;
    m.kz = std::sqrt(lambda);
    if (m.kz.real() < 0.0) m.kz = -m.kz;
    m.beta = 2.0 / h * std::asin(0.5 * h * m.kz);
    m.hphi = x;
    m.er.resize(nr);
    m.ez.assign(nr + 1, 0.0);
    for (int i = 0; i < nr; ++i) m.er[i] = m.kz * x[i] / (wt * eps_r[i]);
    for (int i = 0; i < nr; ++i) {
        const Complex gi = gp[i] * x[i] + (i > 0 ? gm[i] * x[i - 1] : Complex(0.0));
        m.ez[i] = I * gi / (wt * eps_z[i]);
    }

    double p = 0.0;
    for (int i = 0; i < nr; ++i) p += 0.5 * std::real(m.er[i] * std::conj(m.hphi[i])) * 2.0 * pi * g.r_er(i) * h;
    if (!(p > 0.0)) throw Error(ErrorKind::NoMode, "discrete mode carries no forward power", {lambda.real(), p});
    const double s = 1.0 / std::sqrt(p);
    for (auto& v : m.er) v *= s;
    for (auto& v : m.ez) v *= s;
    for (auto& v : m.hphi) v *= s;
    m.grid_power = 1.0;
    return m;
}

/// Total-field/scattered-field injection of a discrete mode through the single
/// Er plane `mode.plane_j`. Forward launch puts the total-field region at
/// z >= plane, backward launch at z <= plane; the backward wave is the z-mirror
/// (Er, -Hphi) of the forward one.
///
/// The ramped drive a(t) e^{-iwt} is injected as
/// Re[(P a + i P' a' - P'' a'' / 2) e^{-iwt}], with P', P'' the w-derivatives
/// of the incident phasors taken from neighbouring discrete modes, so the E and
/// H corrections stay consistent across the ramp's sidebands.
class TfsfSource {
public:
    TfsfSource(const Simulation& sim, DiscreteMode mode, bool forward, double amplitude, double ramp_periods)
        : mode_(std::move(mode)), forward_(forward), amp_(amplitude), ramp_periods_(ramp_periods)
    {
        const auto& g = sim.grid();
        if (static_cast<int>(mode_.hphi.size()) != g.nr)
            throw Error(ErrorKind::Config, "TF/SF profile does not match the grid");
        const double sgn = forward_ ? 1.0 : -1.0;
        auto phasors = [&](const DiscreteMode& m, std::vector<Complex>& e, std::vector<Complex>& hh) {
            const Complex half = std::exp(-I * m.beta * (0.5 * g.pitch_nm));
            e.resize(g.nr);
            hh.resize(g.nr);
            for (int i = 0; i < g.nr; ++i) {
                e[i] = m.er[i];
                hh[i] = sgn * m.hphi[i] * half;
            }
        };
        phasors(mode_, pe_, ph_);
        de_.assign(g.nr, 0.0);
        dh_.assign(g.nr, 0.0);
        d2e_.assign(g.nr, 0.0);
        d2h_.assign(g.nr, 0.0);
        if (amp_ == 0.0 || ramp_periods_ <= 0.0) return;

        std::size_t kref = 0;
        for (std::size_t i = 0; i < mode_.hphi.size(); ++i)
            if (std::abs(mode_.hphi[i]) > std::abs(mode_.hphi[kref])) kref = i;
        const double w = sim.omega(), dw = 5e-3 * w;
        std::vector<Complex> e_lo, h_lo, e_hi, h_hi;
        for (int side : {-1, 1}) {
            auto m = solve_discrete_mode(sim, mode_.plane_j, mode_.beta, &mode_.hphi, w + side * dw);
            const Complex rot = std::abs(mode_.hphi[kref]) / m.hphi[kref] * (mode_.hphi[kref] / std::abs(mode_.hphi[kref]));
            for (auto* v : {&m.er, &m.ez, &m.hphi})
                for (auto& x : *v) x *= rot;
            phasors(m, side < 0 ? e_lo : e_hi, side < 0 ? h_lo : h_hi);
        }
        for (int i = 0; i < g.nr; ++i) {
            de_[i] = (e_hi[i] - e_lo[i]) / (2.0 * dw);
            dh_[i] = (h_hi[i] - h_lo[i]) / (2.0 * dw);
            d2e_[i] = (e_hi[i] - 2.0 * pe_[i] + e_lo[i]) / (dw * dw);
            d2h_[i] = (h_hi[i] - 2.0 * ph_[i] + h_lo[i]) / (dw * dw);
        }
    }

    const DiscreteMode& mode() const { return mode_; }
    bool forward() const { return forward_; }

    void install(Simulation& sim)
    {
        auto self = this;
        sim.add_hook({[self](Simulation& s) { self->begin(s); },
                      [self](Simulation& s, int i) {
                          if (self->h_on_) {
                              const double c = s.dt() / s.grid().pitch_nm;
                              const double sgn = self->forward_ ? 1.0 : -1.0;
                              const auto& q = self->hq_;
                              s.hp(i, self->jh_) += sgn * c * std::real(self->pe_[i] * q[0] + self->de_[i] * q[1] + self->d2e_[i] * q[2]);
                          }
                      },
                      [self](Simulation& s, int i) {
                          if (self->e_on_) {
                              const int j = self->mode_.plane_j;
                              const double sgn = self->forward_ ? 1.0 : -1.0;
                              const auto& q = self->eq_;
                              s.er(i, j) += sgn * s.cb_er()(i, j) *
                                            std::real(self->ph_[i] * q[0] + self->dh_[i] * q[1] + self->d2h_[i] * q[2]) *
                                            (1.0 / s.grid().pitch_nm);
                          }
                      }});
    }

private:
    struct Env {
        double a = 0.0, da = 0.0, d2a = 0.0;
    };

    /// Envelope a(t) and its first two derivatives.
    Env envelope(const Simulation& s, double t) const
    {
        const double period = 2.0 * pi / s.omega();
        const double tr = ramp_periods_ * period;
        if (t <= 0.0) return {};
        if (ramp_periods_ <= 0.0 || t >= tr) return {amp_, 0.0, 0.0};
        const double k = pi / tr;
        return {amp_ * ramp(t, period, ramp_periods_), amp_ * 0.5 * k * std::sin(k * t),
                amp_ * 0.5 * k * k * std::cos(k * t)};
    }

    // Envelope-weighted phasors for this step: H correction at t = n dt,
    // E correction at t = (n + 1/2) dt.
    void begin(const Simulation& s)
    {
        auto coeffs = [&](double t, std::array<Complex, 3>& q) {
            const auto env = envelope(s, t);
            if (env.a == 0.0) return false;
            const Complex ph = std::exp(Complex(0.0, -s.omega() * t));
            q = {env.a * ph, I * env.da * ph, -0.5 * env.d2a * ph};
            return true;
        };
        h_on_ = coeffs(s.time_e(), hq_);
        e_on_ = coeffs(s.time_e() + 0.5 * s.dt(), eq_);
        jh_ = forward_ ? mode_.plane_j - 1 : mode_.plane_j;
    }

    DiscreteMode mode_;
    bool forward_;
    double amp_;
    double ramp_periods_;
    std::vector<Complex> pe_, ph_, de_, dh_, d2e_, d2h_;  // incident phasors and w-derivatives
    std::array<Complex, 3> hq_{}, eq_{};
    bool h_on_ = false, e_on_ = false;
    int jh_ = 0;
};

/// Axial point dipole on the axis, driven as a soft Ez current.
class DipoleSource {
public:
    DipoleSource(double z_nm, double amplitude, double ramp_periods)
        : z_(z_nm), amp_(amplitude), ramp_periods_(ramp_periods)
    {
    }

    /// Custom waveform J(t) instead of the ramped CW drive.
    void set_waveform(std::function<double(double)> f) { waveform_ = std::move(f); }

    int row(const GridSpec& g) const
    {
        return static_cast<int>(std::floor((z_ - g.z_min_nm) / g.pitch_nm));
    }

    void install(Simulation& sim)
    {
        const auto& g = sim.grid();
        const int j = row(g);
        if (j < 0 || j >= g.nz) throw Error(ErrorKind::Config, "dipole lies outside the grid");
        index_ = static_cast<std::size_t>(j);  // Ez(0, j)
        auto self = this;
        sim.add_hook({[self](Simulation& s) {
                          const double t = s.time_e() + 0.5 * s.dt();
                          const double v = self->value(s, t);
                          if (v != 0.0) s.ez_currents().push_back({self->index_, v});
                      },
                      nullptr, nullptr});
    }

private:
    double value(const Simulation& s, double t) const
    {
        if (waveform_) return waveform_(t);
        return amp_ * ramp(t, 2.0 * pi / s.omega(), ramp_periods_) * std::sin(s.omega() * t);
    }

    double z_;
    double amp_;
    double ramp_periods_;
    std::size_t index_ = 0;
    std::function<double(double)> waveform_;
};

}  // namespace nc::fdtd
