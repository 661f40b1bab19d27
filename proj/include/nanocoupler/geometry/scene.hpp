#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/core/units.hpp"
#include "nanocoupler/materials/material.hpp"

namespace nc::geometry {

using materials::MaterialModel;

struct Cylinder {
    double radius_nm;
    double z0_nm, z1_nm;

    bool contains(double r, double z) const { return r <= radius_nm && z >= z0_nm && z <= z1_nm; }
};

/// Cylinder whose end faces may have their outer edge rounded with a
/// quarter-circle of `edge_radius_nm` (edge_radius = radius gives a hemisphere).
struct RoundedEndCylinder {
    double radius_nm;
    double z0_nm, z1_nm;
    double edge_radius_nm;
    bool round_lo = false;
    bool round_hi = true;

    bool contains(double r, double z) const
    {
        if (r > radius_nm || z < z0_nm || z > z1_nm) return false;
        const double e = edge_radius_nm;
        if (e <= 0.0 || r <= radius_nm - e) return true;
        const double dr = r - (radius_nm - e);
        if (round_hi && z > z1_nm - e) {
            const double dz = z - (z1_nm - e);
            return dr * dr + dz * dz <= e * e;
        }
        if (round_lo && z < z0_nm + e) {
            const double dz = (z0_nm + e) - z;
            return dr * dr + dz * dz <= e * e;
        }
        return true;
    }
};

/// Cone from a base disc at base_z narrowing toward tip_z, terminated by a
/// paraboloid tangent to the flanks with apex curvature radius apex_radius.
struct ConeParaboloid {
    double base_radius_nm;
    double half_angle_deg;
    double base_z_nm;
    double tip_z_nm;
    double apex_radius_nm = 10.0;

    double tan_half() const { return std::tan(half_angle_deg * pi / 180.0); }
    double tangency_radius() const { return apex_radius_nm / tan_half(); }
    double paraboloid_length() const
    {
        const double rt = tangency_radius();
        return rt * rt / (2.0 * apex_radius_nm);
    }

    /// Height needed from base to tip for the given shape parameters.
    double natural_height() const
    {
        const double rt = tangency_radius();
        if (rt >= base_radius_nm) return base_radius_nm * base_radius_nm / (2.0 * apex_radius_nm);
        return paraboloid_length() + (base_radius_nm - rt) / tan_half();
    }

    /// Local radius at axial distance d from the tip.
    double radius_at(double d) const
    {
        if (d < 0.0) return -1.0;
        const double lp = paraboloid_length();
        double r = d <= lp ? std::sqrt(2.0 * apex_radius_nm * d) : tangency_radius() + (d - lp) * tan_half();
        return std::min(r, base_radius_nm);
    }

    bool contains(double r, double z) const
    {
        const double dir = tip_z_nm >= base_z_nm ? 1.0 : -1.0;
        const double along = (z - base_z_nm) * dir;
        if (along < 0.0 || along > std::abs(tip_z_nm - base_z_nm)) return false;
        return r <= radius_at(std::abs(tip_z_nm - z));
    }
};

struct HalfSpace {
    double z_boundary_nm;
    int side = +1;  // +1: z >= boundary, -1: z <= boundary

    bool contains(double, double z) const { return side > 0 ? z >= z_boundary_nm : z <= z_boundary_nm; }
};

using Shape = std::variant<Cylinder, RoundedEndCylinder, ConeParaboloid, HalfSpace>;

struct Element {
    Shape shape;
    MaterialModel material;
    std::string name;

    bool contains(double r, double z) const
    {
        return std::visit([&](const auto& s) { return s.contains(r, z); }, shape);
    }
};

struct Domain {
    double r_max_nm = 0.0;
    double z_min_nm = 0.0;
    double z_max_nm = 0.0;
};

enum class Direction { MWtoDF, DFtoMW };

inline std::string to_string(Direction d) { return d == Direction::MWtoDF ? "mw_to_df" : "df_to_mw"; }

/// Axisymmetric scene. Later elements take precedence where they overlap.
struct Scene {
    std::vector<Element> elements;
    MaterialModel background = MaterialModel::vacuum();
    Domain domain;
    double lambda_vac_nm = 0.0;
    double interface_z_nm = 0.0;
    std::optional<double> emitter_z_nm;
    std::optional<double> tip_gap_nm;  // smallest feature along z that must be resolved

    const MaterialModel& material_at(double r, double z) const
    {
        for (auto it = elements.rbegin(); it != elements.rend(); ++it)
            if (it->contains(r, z)) return it->material;
        return background;
    }

    void validate() const
    {
        if (!(domain.r_max_nm > 0.0) || !(domain.z_max_nm > domain.z_min_nm))
            throw Error(ErrorKind::Geometry, "empty simulation domain");
        if (lambda_vac_nm > 0.0 && domain.r_max_nm < 2.0 * lambda_vac_nm)
            throw Error(ErrorKind::Geometry, "radial extent must be at least two wavelengths");
        for (const auto& e : elements) {
            std::visit(
                [&](const auto& s) {
                    using T = std::decay_t<decltype(s)>;
                    if constexpr (std::is_same_v<T, Cylinder> || std::is_same_v<T, RoundedEndCylinder>) {
                        if (!(s.radius_nm > 0.0) || s.radius_nm > domain.r_max_nm || !(s.z1_nm > s.z0_nm) ||
                            s.z0_nm < domain.z_min_nm || s.z1_nm > domain.z_max_nm)
                            throw Error(ErrorKind::Geometry, "element '" + e.name + "' lies outside the domain");
                    }
                    if constexpr (std::is_same_v<T, RoundedEndCylinder>) {
                        if (s.edge_radius_nm < 0.0 || s.edge_radius_nm > s.radius_nm ||
                            2.0 * s.edge_radius_nm > (s.z1_nm - s.z0_nm) + 1e-9)
                            throw Error(ErrorKind::Geometry, "edge radius of '" + e.name + "' out of range");
                    }
                    if constexpr (std::is_same_v<T, ConeParaboloid>) {
                        if (!(s.half_angle_deg > 0.0) || !(s.half_angle_deg < 90.0))
                            throw Error(ErrorKind::Geometry, "cone opening angle must be in (0, 180) degrees");
                        if (!(s.apex_radius_nm > 0.0) || !(s.base_radius_nm > 0.0))
                            throw Error(ErrorKind::Geometry, "cone radii must be positive");
                        const double lo = std::min(s.base_z_nm, s.tip_z_nm), hi = std::max(s.base_z_nm, s.tip_z_nm);
                        if (lo < domain.z_min_nm || hi > domain.z_max_nm || s.base_radius_nm > domain.r_max_nm)
                            throw Error(ErrorKind::Geometry, "cone '" + e.name + "' does not fit in the domain");
                    }
                },
                e.shape);
        }
    }
};

struct ButtJointParams {
    double r_mw_nm = 164.0;
    double r_df_nm = 342.0;
    MaterialModel metal;
    MaterialModel dielectric = MaterialModel::dielectric(1.45, "silica");
    double gap_nm = 0.0;
    double edge_radius_nm = 0.0;
    double launch_length_nm = 0.0;   // guide length on the source side of z = 0
    double receive_length_nm = 0.0;  // domain length after the interface
    double r_max_nm = 0.0;
    Direction direction = Direction::MWtoDF;
    double lambda_vac_nm = 633.0;
};

/// Launch guide on z <= 0, receiving guide from z = gap to the far end.
inline Scene butt_joint_scene(const ButtJointParams& p)
{
    if (p.gap_nm < 0.0) throw Error(ErrorKind::Geometry, "gap must be >= 0 (got " + std::to_string(p.gap_nm) + ")");
    if (p.launch_length_nm < 2.0 * p.lambda_vac_nm || p.receive_length_nm < 2.0 * p.lambda_vac_nm + p.gap_nm)
        throw Error(ErrorKind::Geometry, "guide lengths must be at least two wavelengths on each side");
    if (!p.metal.is_dispersive()) throw Error(ErrorKind::Geometry, "butt joint needs a metal (Drude) wire");

    Scene s;
    s.lambda_vac_nm = p.lambda_vac_nm;
    s.domain = {p.r_max_nm, -p.launch_length_nm, p.receive_length_nm};
    s.interface_z_nm = 0.0;
    const double zlo = s.domain.z_min_nm, zhi = s.domain.z_max_nm;
    const bool mw_first = p.direction == Direction::MWtoDF;
    const double mw0 = mw_first ? zlo : p.gap_nm, mw1 = mw_first ? 0.0 : zhi;
    const double df0 = mw_first ? p.gap_nm : zlo, df1 = mw_first ? zhi : 0.0;
    s.elements.push_back({Cylinder{p.r_df_nm, df0, df1}, p.dielectric, "fiber"});
    s.elements.push_back({RoundedEndCylinder{p.r_mw_nm, mw0, mw1, p.edge_radius_nm, !mw_first, mw_first},
                          p.metal, "wire"});
    s.validate();
    return s;
}

struct SnomParams {
    double df_radius_nm = 410.0;
    double cone_base_radius_nm = 200.0;
    double opening_angle_deg = 14.0;
    bool full_angle = true;
    double apex_radius_nm = 10.0;
    double tip_substrate_gap_nm = 5.0;
    double substrate_index = 1.7;
    double emitter_depth_nm = 5.0;
    MaterialModel metal;
    MaterialModel dielectric = MaterialModel::dielectric(1.45, "silica");
    double lambda_vac_nm = 780.0;
    double df_length_nm = 0.0;         // fibre length before the cone base at z = 0
    double substrate_depth_nm = 0.0;   // substrate thickness kept inside the domain
    double r_max_nm = 0.0;
};

/// Fibre on z <= 0, metal cone on its end face pointing to +z, substrate
/// half-space below the tip gap with the emitter on the axis.
inline Scene snom_scene(const SnomParams& p)
{
    for (double v : {p.df_radius_nm, p.cone_base_radius_nm, p.tip_substrate_gap_nm, p.substrate_index,
                     p.emitter_depth_nm, p.apex_radius_nm})
        if (!(v > 0.0)) throw Error(ErrorKind::Geometry, "SNOM lengths and indices must be positive");
    const double half = p.full_angle ? 0.5 * p.opening_angle_deg : p.opening_angle_deg;
    if (!(half > 0.0) || !(half < 90.0))
        throw Error(ErrorKind::Geometry, "cone opening angle must be strictly between 0 and 180 degrees");

    ConeParaboloid cone{p.cone_base_radius_nm, half, 0.0, 0.0, p.apex_radius_nm};
    cone.tip_z_nm = cone.natural_height();
    const double z_sub = cone.tip_z_nm + p.tip_substrate_gap_nm;

    Scene s;
    s.lambda_vac_nm = p.lambda_vac_nm;
    s.domain = {p.r_max_nm, -p.df_length_nm, z_sub + p.substrate_depth_nm};
    if (!(p.df_length_nm > 0.0) || !(p.substrate_depth_nm > p.emitter_depth_nm))
        throw Error(ErrorKind::Geometry, "SNOM domain too short for the fibre or the emitter depth");
    s.elements.push_back({Cylinder{p.df_radius_nm, s.domain.z_min_nm, 0.0}, p.dielectric, "fiber"});
    s.elements.push_back({cone, p.metal, "cone"});
    s.elements.push_back(
        {HalfSpace{z_sub, +1}, MaterialModel::dielectric(p.substrate_index, "substrate"), "substrate"});
    s.emitter_z_nm = z_sub + p.emitter_depth_nm;
    s.tip_gap_nm = p.tip_substrate_gap_nm;
    s.interface_z_nm = 0.0;
    s.validate();
    return s;
}

}  // namespace nc::geometry
