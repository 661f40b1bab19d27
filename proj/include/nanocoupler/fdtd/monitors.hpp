#pragma once

#include <cmath>
#include <vector>

#include "nanocoupler/fdtd/simulation.hpp"
#include "nanocoupler/fdtd/sources.hpp"

namespace nc::fdtd {

enum class Comp { Er, Ez, Hphi };

/// Single-frequency lock-in DFT over whole optical periods. Samples taken at
/// the stored time level of each component; `finish_period` turns the sums
/// into complex amplitudes X with field = Re[X e^{-i w t}].
class Lockin {
public:
    std::size_t add(Comp c, std::size_t flat_index)
    {
        comp_.push_back(c);
        index_.push_back(flat_index);
        acc_.push_back(0.0);
        return comp_.size() - 1;
    }

    std::size_t size() const { return comp_.size(); }
    bool empty() const { return comp_.empty(); }

    void accumulate(const Simulation& s)
    {
        const Complex pe = std::exp(Complex(0.0, s.omega() * s.time_e()));
        const Complex ph = std::exp(Complex(0.0, s.omega() * s.time_h()));
        for (std::size_t k = 0; k < comp_.size(); ++k) {
            switch (comp_[k]) {
            case Comp::Er: acc_[k] += s.er.v[index_[k]] * pe; break;
            case Comp::Ez: acc_[k] += s.ez.v[index_[k]] * pe; break;
            case Comp::Hphi: acc_[k] += s.hp.v[index_[k]] * ph; break;
            }
        }
        ++samples_;
    }

    void finish_period()
    {
        result_.resize(acc_.size());
        const double f = samples_ > 0 ? 2.0 / samples_ : 0.0;
        for (std::size_t k = 0; k < acc_.size(); ++k) {
            result_[k] = f * acc_[k];
            acc_[k] = 0.0;
        }
        samples_ = 0;
    }

    Complex operator[](std::size_t k) const { return result_[k]; }
    const std::vector<Complex>& result() const { return result_; }

private:
    std::vector<Comp> comp_;
    std::vector<std::size_t> index_;
    std::vector<Complex> acc_;
    std::vector<Complex> result_;
    long samples_ = 0;
};

/// Transverse fields on an Er plane: Er(i, j) and Hphi averaged from the two
/// adjacent half planes, for i < i_max.
struct PlaneMonitor {
    int j = 0;
    int i_max = 0;
    std::size_t first = 0;  // slot of Er(0); Hphi below/above follow per i

    void attach(Lockin& l, const GridSpec& g)
    {
        if (j < 1 || j >= g.nz) throw Error(ErrorKind::Config, "monitor plane outside the grid");
        first = l.size();
        for (int i = 0; i < i_max; ++i) {
            l.add(Comp::Er, static_cast<std::size_t>(i) * (g.nz + 1) + j);
            l.add(Comp::Hphi, static_cast<std::size_t>(i) * g.nz + j - 1);
            l.add(Comp::Hphi, static_cast<std::size_t>(i) * g.nz + j);
        }
    }

    Complex er(const Lockin& l, int i) const { return l[first + 3 * i]; }
    Complex hphi(const Lockin& l, int i) const { return 0.5 * (l[first + 3 * i + 1] + l[first + 3 * i + 2]); }

    /// Net +z power through the disc r < i_max h (internal units).
    double flux(const Lockin& l, const GridSpec& g) const
    {
        double p = 0.0;
        for (int i = 0; i < i_max; ++i)
            p += 0.5 * std::real(er(l, i) * std::conj(hphi(l, i))) * 2.0 * pi * g.r_er(i) * g.pitch_nm;
        return p;
    }

    struct Amplitudes {
        Complex forward, backward;
        double mode_power;  // grid flux carried by the unit-amplitude mode
    };

    /// Forward/backward amplitudes of a discrete mode from the unconjugated
    /// cross products. The plane-averaged Hphi carries cos(beta h / 2) relative
    /// to the mode's own Hphi, which is applied to the mode side.
    /// The backward mode is the z-mirror (Er, -Hphi).
    Amplitudes modal(const Lockin& l, const GridSpec& g, const DiscreteMode& m) const
    {
        const Complex c = std::cos(0.5 * m.beta * g.pitch_nm);
        Complex sp = 0.0, sm = 0.0, nn = 0.0;
        double pm = 0.0;
        for (int i = 0; i < i_max; ++i) {
            const double w = g.r_er(i);
            const Complex hm = c * m.hphi[i];
            sp += (er(l, i) * hm + m.er[i] * hphi(l, i)) * w;
            sm += (er(l, i) * hm - m.er[i] * hphi(l, i)) * w;
            nn += m.er[i] * hm * w;
            pm += 0.5 * std::real(m.er[i] * std::conj(hm)) * 2.0 * pi * w * g.pitch_nm;
        }
        return {sp / (2.0 * nn), sm / (2.0 * nn), pm};
    }
};

/// Radial power leaving through the cylinder r = i h between Ez rows [j0, j1).
struct SideMonitor {
    int i = 0;
    int j0 = 0, j1 = 0;
    std::size_t first = 0;

    void attach(Lockin& l, const GridSpec& g)
    {
        if (i < 1 || i >= g.nr) throw Error(ErrorKind::Config, "side monitor outside the grid");
        first = l.size();
        for (int j = j0; j < j1; ++j) {
            l.add(Comp::Ez, static_cast<std::size_t>(i) * g.nz + j);
            l.add(Comp::Hphi, static_cast<std::size_t>(i - 1) * g.nz + j);
            l.add(Comp::Hphi, static_cast<std::size_t>(i) * g.nz + j);
        }
    }

    double flux(const Lockin& l, const GridSpec& g) const
    {
        double p = 0.0;
        const double r = g.r_ez(i);
        for (int k = 0; k < j1 - j0; ++k) {
            const Complex ez = l[first + 3 * k];
            const Complex h = 0.5 * (l[first + 3 * k + 1] + l[first + 3 * k + 2]);
            p += -0.5 * std::real(ez * std::conj(h)) * 2.0 * pi * r * g.pitch_nm;
        }
        return p;
    }
};

/// Time-averaged ohmic/Drude loss in all metal cells of a box
/// (Er and Ez cells with r < r_max_nm and z0 <= z <= z1).
struct AbsorptionMonitor {
    double r_max_nm = 0.0;
    double z0_nm = 0.0, z1_nm = 0.0;
    std::vector<std::size_t> slots;
    std::vector<double> weight;  // 1/2 w~ Im(eps) dV

    void attach(Lockin& l, const Simulation& s)
    {
        const auto& g = s.grid();
        const auto& med = s.medium();
        const double h = g.pitch_nm;
        const double w = s.omega();
        const double wt = s.omega_tilde(w);
        auto scan = [&](const geometry::ComponentMedium& c, bool is_r) {
            for (const auto& mc : c.metal) {
                const int i = static_cast<int>(mc.index / c.n_z);
                const int j = static_cast<int>(mc.index % c.n_z);
                const double r = is_r ? g.r_er(i) : g.r_ez(i);
                const double z = is_r ? g.z_er(j) : g.z_ez(j);
                if (r > r_max_nm || z < z0_nm || z > z1_nm) continue;
                const double rw = is_r ? r : (i == 0 ? 0.125 * h : r);
                const Complex eps = s.eps_discrete_drude(c.eps_inf[mc.index], mc.wp2, mc.gamma, mc.sigma, w);
                slots.push_back(l.add(is_r ? Comp::Er : Comp::Ez, mc.index));
                weight.push_back(0.5 * wt * eps.imag() * 2.0 * pi * rw * h * h);
            }
        };
        scan(med.er, true);
        scan(med.ez, false);
    }

    double power(const Lockin& l) const
    {
        double p = 0.0;
        for (std::size_t k = 0; k < slots.size(); ++k) p += weight[k] * std::norm(l[slots[k]]);
        return p;
    }
};

}  // namespace nc::fdtd
