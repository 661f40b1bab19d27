#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/core/log.hpp"
#include "nanocoupler/geometry/scene.hpp"

namespace nc::geometry {

/// Staggered (r, z) Yee layout shared by the rasteriser and the engine.
///   Er(i, j):   r = (i + 1/2) h, z = z_min + j h          i < nr,  j <= nz
///   Ez(i, j):   r = i h,         z = z_min + (j + 1/2) h  i <= nr, j < nz
///   Hphi(i, j): r = (i + 1/2) h, z = z_min + (j + 1/2) h  i < nr,  j < nz
/// Arrays are row-major in r with z contiguous.
struct GridSpec {
    double pitch_nm = 0.0;
    int nr = 0;
    int nz = 0;
    double z_min_nm = 0.0;

    double r_er(int i) const { return (i + 0.5) * pitch_nm; }
    double r_ez(int i) const { return i * pitch_nm; }
    double z_er(int j) const { return z_min_nm + j * pitch_nm; }
    double z_ez(int j) const { return z_min_nm + (j + 0.5) * pitch_nm; }

    /// z index of the nearest Er plane.
    int j_of(double z_nm) const { return static_cast<int>(std::lround((z_nm - z_min_nm) / pitch_nm)); }
};

inline GridSpec make_grid(const Domain& d, double pitch_nm)
{
    if (!(pitch_nm > 0.0)) throw Error(ErrorKind::Domain, "pitch must be positive");
    GridSpec g;
    g.pitch_nm = pitch_nm;
    g.nr = static_cast<int>(std::lround(d.r_max_nm / pitch_nm));
    g.nz = static_cast<int>(std::lround((d.z_max_nm - d.z_min_nm) / pitch_nm));
    g.z_min_nm = d.z_min_nm;
    if (g.nr < 2 || g.nz < 2) throw Error(ErrorKind::Geometry, "domain smaller than two cells");
    return g;
}

/// Drude recipe of one E-component cell, rates in internal units.
struct MetalCell {
    std::uint32_t index;  // flat index into the component array
    float fraction;       // metal fill fraction of the dual cell
    double wp2;           // omega_p^2
    double gamma;
    double sigma;         // sigma / eps0
};

struct ComponentMedium {
    int n_r = 0, n_z = 0;
    std::vector<double> eps_inf;   // dense, n_r * n_z
    std::vector<MetalCell> metal;  // sorted by index

    std::size_t size() const { return eps_inf.size(); }
    bool operator==(const ComponentMedium& o) const
    {
        if (n_r != o.n_r || n_z != o.n_z || eps_inf != o.eps_inf || metal.size() != o.metal.size()) return false;
        for (std::size_t k = 0; k < metal.size(); ++k) {
            const auto &a = metal[k], &b = o.metal[k];
            if (a.index != b.index || a.fraction != b.fraction || a.wp2 != b.wp2 || a.gamma != b.gamma ||
                a.sigma != b.sigma)
                return false;
        }
        return true;
    }
};

struct RasterizedMedium {
    GridSpec grid;
    ComponentMedium er;
    ComponentMedium ez;
    std::vector<std::string> material_labels;
    std::vector<std::string> warnings;
};

enum class MetalAveraging {
    Anisotropic,  // target the normal-harmonic / tangential-arithmetic permittivity at the scene wavelength
    Arithmetic,   // volume-weighted Drude parameters
};

struct RasterOptions {
    int subsamples = 32;  // per axis inside mixed cells
    MetalAveraging metal_averaging = MetalAveraging::Anisotropic;
};

namespace detail {

struct MaterialTable {
    std::vector<MaterialModel> models;
    std::vector<int> element_index;  // element -> material id (0 = background)
    std::vector<Complex> eps_at;     // permittivity at the scene wavelength, if one is set
    double omega = 0.0;

    explicit MaterialTable(const Scene& s)
    {
        models.push_back(s.background);
        for (const auto& e : s.elements) {
            int id = -1;
            for (std::size_t k = 0; k < models.size(); ++k)
                if (models[k] == e.material) id = static_cast<int>(k);
            if (id < 0) {
                id = static_cast<int>(models.size());
                models.push_back(e.material);
            }
            element_index.push_back(id);
        }
        if (s.lambda_vac_nm > 0.0) {
            omega = omega_internal(s.lambda_vac_nm);
            for (const auto& m : models) eps_at.push_back(materials::eval_permittivity(m, s.lambda_vac_nm));
        }
    }

    int at(const Scene& s, double r, double z) const
    {
        for (std::size_t k = s.elements.size(); k-- > 0;)
            if (s.elements[k].contains(r, z)) return element_index[k];
        return 0;
    }
};

struct Recipe {
    double eps_inf = 1.0;
    double fraction = 0.0;
    double wp2 = 0.0, gamma = 0.0, sigma = 0.0;
};

inline Recipe pure_recipe(const MaterialModel& m)
{
    Recipe r;
    r.eps_inf = m.eps_static();
    if (const auto* p = m.drude_params()) {
        r.fraction = 1.0;
        r.wp2 = p->omega_p_internal() * p->omega_p_internal();
        r.gamma = p->gamma_internal();
        r.sigma = p->sigma_internal();
    }
    return r;
}

/// Effective recipe for the dual cell [r0, r1] x [z0, z1] of a component
/// polarised along r (`along_r`) or z.
inline Recipe cell_recipe(const Scene& s, const MaterialTable& t, double r0, double r1, double z0, double z1,
                          bool along_r, int subsamples, MetalAveraging averaging = MetalAveraging::Anisotropic)
{
    // Quick uniformity probe on a 3x3 stencil.
    const int c = t.at(s, 0.5 * (r0 + r1), 0.5 * (z0 + z1));
    bool uniform = true;
    for (int a = 0; a < 3 && uniform; ++a)
        for (int b = 0; b < 3 && uniform; ++b)
            uniform = t.at(s, r0 + 0.5 * a * (r1 - r0), z0 + 0.5 * b * (z1 - z0)) == c;
    if (uniform) return pure_recipe(t.models[c]);

    std::vector<double> frac(t.models.size(), 0.0);
    double mr = 0.0, mz = 0.0;    // first moment of eps about the cell centre
    double wr = 0.0, wz = 0.0;    // same for Re eps at the scene wavelength
    const double rc = 0.5 * (r0 + r1), zc = 0.5 * (z0 + z1);
    const int n = subsamples;
    const double w = 1.0 / (n * n);
    for (int a = 0; a < n; ++a) {
        const double r = r0 + (a + 0.5) * (r1 - r0) / n;
        for (int b = 0; b < n; ++b) {
            const double z = z0 + (b + 0.5) * (z1 - z0) / n;
            const int id = t.at(s, r, z);
            frac[id] += w;
            const double e = t.models[id].eps_static();
            mr += w * e * (r - rc) / (r1 - r0);
            mz += w * e * (z - zc) / (z1 - z0);
            if (!t.eps_at.empty()) {
                const double ew = t.eps_at[id].real();
                wr += w * ew * (r - rc) / (r1 - r0);
                wz += w * ew * (z - zc) / (z1 - z0);
            }
        }
    }

    Recipe out;
    bool has_metal = false;
    for (std::size_t k = 0; k < frac.size(); ++k)
        if (frac[k] > 0.0 && t.models[k].is_dispersive()) has_metal = true;

    if (!has_metal) {
        // Anisotropic average: harmonic along the interface normal, arithmetic along it.
        double mean = 0.0, inv = 0.0;
        for (std::size_t k = 0; k < frac.size(); ++k) {
            if (frac[k] == 0.0) continue;
            const double e = t.models[k].eps_static();
            mean += frac[k] * e;
            inv += frac[k] / e;
        }
        const double norm = std::hypot(mr, mz);
        const double proj = norm > 0.0 ? (along_r ? mr : mz) / norm : 0.0;
        out.eps_inf = proj * proj / inv + (1.0 - proj * proj) * mean;
        return out;
    }

    if (averaging == MetalAveraging::Anisotropic && !t.eps_at.empty()) {
        Complex mean = 0.0, inv = 0.0;
        double metal_frac = 0.0, einf = 0.0;
        for (std::size_t k = 0; k < frac.size(); ++k) {
            if (frac[k] == 0.0) continue;
            mean += frac[k] * t.eps_at[k];
            inv += frac[k] / t.eps_at[k];
            einf += frac[k] * pure_recipe(t.models[k]).eps_inf;
            if (t.models[k].is_dispersive()) metal_frac += frac[k];
        }
        const double norm = std::hypot(wr, wz);
        const double proj = norm > 0.0 ? (along_r ? wr : wz) / norm : 0.0;
        const Complex target = proj * proj / inv + (1.0 - proj * proj) * mean;
        // Passive single-pole recipe with exactly this permittivity at omega.
        out.fraction = metal_frac;
        const double a = einf - target.real();
        if (a <= 0.0) {
            out.eps_inf = target.real();
            out.sigma = t.omega * std::max(0.0, target.imag());
        } else {
            out.eps_inf = einf;
            out.gamma = t.omega * std::max(0.0, target.imag()) / a;
            out.wp2 = a * (t.omega * t.omega + out.gamma * out.gamma);
        }
        return out;
    }

    // Metal present: mix eps_inf and the Drude weights by volume, which is the
    // arithmetic mean of the complex permittivities.
    double metal_frac = 0.0, gamma_w = 0.0;
    out.eps_inf = 0.0;
    for (std::size_t k = 0; k < frac.size(); ++k) {
        if (frac[k] == 0.0) continue;
        const auto rec = pure_recipe(t.models[k]);
        out.eps_inf += frac[k] * rec.eps_inf;
        out.wp2 += frac[k] * rec.wp2;
        out.sigma += frac[k] * rec.sigma;
        if (t.models[k].is_dispersive()) {
            metal_frac += frac[k];
            gamma_w += frac[k] * rec.gamma;
        }
    }
    out.fraction = metal_frac;
    out.gamma = metal_frac > 0.0 ? gamma_w / metal_frac : 0.0;
    return out;
}

}  // namespace detail

inline RasterizedMedium rasterize(const Scene& scene, double pitch_nm, const RasterOptions& opt = {})
{
    scene.validate();
    RasterizedMedium m;
    m.grid = make_grid(scene.domain, pitch_nm);
    const auto& g = m.grid;
    const double h = g.pitch_nm;
    const detail::MaterialTable table(scene);
    for (const auto& mm : table.models) m.material_labels.push_back(mm.label);

    auto fill = [&](ComponentMedium& c, int n_r, int n_z, bool along_r) {
        c.n_r = n_r;
        c.n_z = n_z;
        c.eps_inf.assign(static_cast<std::size_t>(n_r) * n_z, 1.0);
        c.metal.clear();
        for (int i = 0; i < n_r; ++i) {
            const double rc = along_r ? g.r_er(i) : g.r_ez(i);
            const double r0 = std::max(0.0, rc - 0.5 * h), r1 = rc + 0.5 * h;
            for (int j = 0; j < n_z; ++j) {
                const double zc = along_r ? g.z_er(j) : g.z_ez(j);
                const auto rec =
                    detail::cell_recipe(scene, table, r0, r1, zc - 0.5 * h, zc + 0.5 * h, along_r, opt.subsamples,
                                        opt.metal_averaging);
                const std::size_t k = static_cast<std::size_t>(i) * n_z + j;
                c.eps_inf[k] = rec.eps_inf;
                if (rec.wp2 > 0.0 || rec.sigma > 0.0)
                    c.metal.push_back({static_cast<std::uint32_t>(k), static_cast<float>(rec.fraction), rec.wp2,
                                       rec.gamma, rec.sigma});
            }
        }
    };
    fill(m.er, g.nr, g.nz + 1, true);
    fill(m.ez, g.nr + 1, g.nz, false);

    if (scene.tip_gap_nm && *scene.tip_gap_nm / h < 4.0) {
        m.warnings.push_back("tip gap of " + std::to_string(*scene.tip_gap_nm) + " nm spans only " +
                             std::to_string(*scene.tip_gap_nm / h) + " cells (< 4)");
        log::warn(m.warnings.back());
    }
    return m;
}

}  // namespace nc::geometry
