#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/experiments/digest.hpp"

namespace nc::io {

struct MaterialsConfig {
    std::string data_dir;  // empty: library default / environment
    std::string metal = "ag";
    std::string dataset;   // empty: library default
    double dielectric_index = 1.45;
    bool operator==(const MaterialsConfig&) const = default;
};

struct GeometryConfig {
    std::string kind = "butt_joint";  // butt_joint | snom
    double lambda_nm = 633.0;
    // butt joint
    double r_mw_nm = 164.0;
    double r_df_nm = 342.0;
    double gap_nm = 0.0;
    double edge_radius_nm = 0.0;
    std::string direction = "mw_to_df";
    // snom
    double df_radius_nm = 410.0;
    double cone_base_radius_nm = 200.0;
    double opening_angle_deg = 14.0;
    bool full_angle = true;
    double apex_radius_nm = 10.0;
    double tip_substrate_gap_nm = 5.0;
    double substrate_index = 1.7;
    double emitter_depth_nm = 5.0;
    bool operator==(const GeometryConfig&) const = default;
};

struct GridConfig {
    double pitch_nm = 2.0;
    double courant = 0.5;
    int pml_cells = 10;
    bool align_to_wire = true;
    bool operator==(const GridConfig&) const = default;
};

struct SourceConfig {
    double ramp_periods = 5.0;
    bool operator==(const SourceConfig&) const = default;
};

struct MonitorConfig {
    std::optional<double> offset_nm;  // default: one wavelength
    double box_half_size_nm = 2.0;
    bool operator==(const MonitorConfig&) const = default;
};

struct SteadyConfig {
    double tolerance = 1e-3;
    int min_periods = 10;
    int max_periods = 200;
    int confirm_periods = 3;
    bool operator==(const SteadyConfig&) const = default;
};

struct SnapshotConfig {
    double every_fs = 0.0;
    int max_count = 200;
    bool operator==(const SnapshotConfig&) const = default;
};

struct SweepConfig {
    std::string kind = "radius_map";  // radius_map | rounding | wavelength | index
    std::vector<double> r_mw_nm;
    std::vector<double> r_df_nm;
    std::vector<double> edge_radius_nm;
    std::vector<double> lambda_nm;
    std::vector<double> df_index;
    bool optimize = false;  // wavelength sweep: optimise radii per point instead of fixed radii
    bool operator==(const SweepConfig&) const = default;
};

struct OptimizeConfig {
    double seed_span = 0.2;
    double seed_step_nm = 4.0;
    std::vector<double> steps_nm = {8.0, 2.0};
    int max_moves = 12;
    bool operator==(const OptimizeConfig&) const = default;
};

struct SnomConfig {
    std::string mode = "illuminate";  // illuminate | collect
    bool allow_coarse_gap = false;
    bool operator==(const SnomConfig&) const = default;
};

struct ConvergenceConfig {
    std::vector<double> pitches_nm = {2.0, 1.0};
    bool operator==(const ConvergenceConfig&) const = default;
};

struct OutputConfig {
    std::string dir = "out";
    int threads = 1;
    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    MaterialsConfig materials;
    GeometryConfig geometry;
    GridConfig grid;
    SourceConfig source;
    MonitorConfig monitors;
    SteadyConfig steady;
    SnapshotConfig snapshots;
    SweepConfig sweep;
    OptimizeConfig optimize;
    SnomConfig snom;
    ConvergenceConfig convergence;
    OutputConfig output;
    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline const std::vector<std::string>& unit_suffixes()
{
    static const std::vector<std::string> s = {"_nm", "_um", "_mm", "_m", "_fs", "_ps", "_s", "_deg", "_rad"};
    return s;
}

inline std::string unit_stem(const std::string& key)
{
    for (const auto& s : unit_suffixes())
        if (key.size() > s.size() && key.compare(key.size() - s.size(), s.size(), s) == 0)
            return key.substr(0, key.size() - s.size());
    return key;
}

class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const YAML::Node& n, const std::string& msg)
    {
        const auto m = n.Mark();
        errors_.push_back(m.line >= 0 ? "line " + std::to_string(m.line + 1) + ": " + msg : msg);
    }

    /// Calls `field(key, node)` for every key of the mapping `sec`; reports
    /// keys not in `known`, with a hint when only the unit suffix differs.
    void section(const YAML::Node& sec, const std::string& name, const std::vector<std::string>& known,
                 const std::function<void(const std::string&, const YAML::Node&)>& field)
    {
        if (!sec) return;
        if (!sec.IsMap()) {
            error(sec, "section '" + name + "' must be a mapping");
            return;
        }
        for (const auto& kv : sec) {
            const auto key = kv.first.as<std::string>();
            if (std::find(known.begin(), known.end(), key) != known.end()) {
                field(key, kv.second);
                continue;
            }
            std::string hint;
            const auto stem = unit_stem(key);
            for (const auto& k : known) {
                if (unit_stem(k) == stem && k != stem) {
                    hint = stem == key ? " (missing unit suffix, expected '" + k + "')"
                                       : " (unit mismatch, expected '" + k + "')";
                    break;
                }
                if (stem == key && k.size() > key.size() && unit_stem(k) != k &&
                    unit_stem(k).size() >= key.size() &&
                    unit_stem(k).compare(unit_stem(k).size() - key.size(), key.size(), key) == 0)
                    hint = " (missing unit suffix; lengths are keyed like '" + k + "')";
            }
            error(kv.first, "unknown key '" + name + "." + key + "'" + hint);
        }
    }

    template <class T>
    void scalar(const YAML::Node& n, const std::string& what, T& out)
    {
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            error(n, "'" + what + "' has the wrong type");
        }
    }

    void list(const YAML::Node& n, const std::string& what, std::vector<double>& out)
    {
        if (!n.IsSequence()) {
            error(n, "'" + what + "' must be a list");
            return;
        }
        out.clear();
        for (const auto& v : n) {
            double x = 0.0;
            scalar(v, what, x);
            out.push_back(x);
        }
    }

    void require(bool ok, const YAML::Node& n, const std::string& msg)
    {
        if (!ok) error(n, msg);
    }

private:
    std::vector<std::string>& errors_;
};

}  // namespace detail

/// Parses and validates a YAML run configuration. All problems are collected
/// and reported together in one config error, each with its line number.
inline RunConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw Error(ErrorKind::Config, std::string("malformed config: ") + e.what());
    }
    RunConfig c;
    if (!root || root.IsNull()) return c;
    std::vector<std::string> errors;
    detail::Reader rd(errors);
    if (!root.IsMap()) throw Error(ErrorKind::Config, "config must be a mapping of sections");

    // Range checks run after a key is read so they can point at its line.
    auto positive = [&](const YAML::Node& n, const std::string& k, double v) {
        rd.require(v > 0.0, n, k + " must be > 0");
    };
    auto non_negative = [&](const YAML::Node& n, const std::string& k, double v) {
        rd.require(v >= 0.0, n, k + " must be >= 0");
    };

    const std::vector<std::string> sections = {"materials", "geometry", "grid",     "source",      "monitors", "steady",
                                               "snapshots", "sweep",    "optimize", "convergence", "snom",     "output"};
    for (const auto& kv : root) {
        const auto name = kv.first.as<std::string>();
        if (std::find(sections.begin(), sections.end(), name) == sections.end())
            rd.error(kv.first, "unknown section '" + name + "'");
    }

    rd.section(root["materials"], "materials", {"data_dir", "metal", "dataset", "dielectric_index"},
               [&](const std::string& k, const YAML::Node& n) {
                   auto& m = c.materials;
                   if (k == "data_dir") rd.scalar(n, k, m.data_dir);
                   if (k == "metal") rd.scalar(n, k, m.metal);
                   if (k == "dataset") rd.scalar(n, k, m.dataset);
                   if (k == "dielectric_index") {
                       rd.scalar(n, k, m.dielectric_index);
                       rd.require(m.dielectric_index >= 1.0, n, "dielectric_index must be >= 1");
                   }
               });

    rd.section(root["geometry"], "geometry",
               {"kind", "lambda_nm", "r_mw_nm", "r_df_nm", "gap_nm", "edge_radius_nm", "direction", "df_radius_nm",
                "cone_base_radius_nm", "opening_angle_deg", "full_angle", "apex_radius_nm", "tip_substrate_gap_nm",
                "substrate_index", "emitter_depth_nm"},
               [&](const std::string& k, const YAML::Node& n) {
                   auto& g = c.geometry;
                   if (k == "kind") {
                       rd.scalar(n, k, g.kind);
                       rd.require(g.kind == "butt_joint" || g.kind == "snom", n,
                                  "geometry.kind must be butt_joint or snom");
                   } else if (k == "direction") {
                       rd.scalar(n, k, g.direction);
                       rd.require(g.direction == "mw_to_df" || g.direction == "df_to_mw", n,
                                  "geometry.direction must be mw_to_df or df_to_mw");
                   } else if (k == "full_angle") {
                       rd.scalar(n, k, g.full_angle);
                   } else {
                       double* slot = k == "lambda_nm"              ? &g.lambda_nm
                                      : k == "r_mw_nm"              ? &g.r_mw_nm
                                      : k == "r_df_nm"              ? &g.r_df_nm
                                      : k == "gap_nm"               ? &g.gap_nm
                                      : k == "edge_radius_nm"       ? &g.edge_radius_nm
                                      : k == "df_radius_nm"         ? &g.df_radius_nm
                                      : k == "cone_base_radius_nm"  ? &g.cone_base_radius_nm
                                      : k == "opening_angle_deg"    ? &g.opening_angle_deg
                                      : k == "apex_radius_nm"       ? &g.apex_radius_nm
                                      : k == "tip_substrate_gap_nm" ? &g.tip_substrate_gap_nm
                                      : k == "substrate_index"      ? &g.substrate_index
                                                                    : &g.emitter_depth_nm;
                       rd.scalar(n, k, *slot);
                       if (k == "gap_nm" || k == "edge_radius_nm")
                           non_negative(n, "geometry." + k, *slot);
                       else if (k == "opening_angle_deg")
                           rd.require(*slot > 0.0 && *slot < 180.0, n, "geometry.opening_angle_deg must be in (0, 180)");
                       else if (k == "substrate_index")
                           rd.require(*slot >= 1.0, n, "geometry.substrate_index must be >= 1");
                       else
                           positive(n, "geometry." + k, *slot);
                   }
               });
    if (c.geometry.edge_radius_nm > c.geometry.r_mw_nm)
        rd.error(root["geometry"], "geometry.edge_radius_nm must not exceed geometry.r_mw_nm");

    rd.section(root["grid"], "grid", {"pitch_nm", "courant", "pml_cells", "align_to_wire"},
               [&](const std::string& k, const YAML::Node& n) {
                   auto& g = c.grid;
                   if (k == "pitch_nm") {
                       rd.scalar(n, k, g.pitch_nm);
                       positive(n, "grid.pitch_nm", g.pitch_nm);
                   }
                   if (k == "courant") {
                       rd.scalar(n, k, g.courant);
                       rd.require(g.courant > 0.0 && g.courant <= 1.0, n, "grid.courant must be in (0, 1]");
                   }
                   if (k == "pml_cells") {
                       rd.scalar(n, k, g.pml_cells);
                       rd.require(g.pml_cells >= 4, n, "grid.pml_cells must be >= 4");
                   }
                   if (k == "align_to_wire") rd.scalar(n, k, g.align_to_wire);
               });

    rd.section(root["source"], "source", {"ramp_periods"}, [&](const std::string& k, const YAML::Node& n) {
        rd.scalar(n, k, c.source.ramp_periods);
        non_negative(n, "source.ramp_periods", c.source.ramp_periods);
    });

    rd.section(root["monitors"], "monitors", {"offset_nm", "box_half_size_nm"},
               [&](const std::string& k, const YAML::Node& n) {
                   double v = 0.0;
                   rd.scalar(n, k, v);
                   positive(n, "monitors." + k, v);
                   if (k == "offset_nm") c.monitors.offset_nm = v;
                   else c.monitors.box_half_size_nm = v;
               });

    rd.section(root["steady"], "steady", {"tolerance", "min_periods", "max_periods", "confirm_periods"},
               [&](const std::string& k, const YAML::Node& n) {
                   auto& s = c.steady;
                   if (k == "tolerance") {
                       rd.scalar(n, k, s.tolerance);
                       non_negative(n, "steady.tolerance", s.tolerance);
                   }
                   if (k == "min_periods") {
                       rd.scalar(n, k, s.min_periods);
                       rd.require(s.min_periods >= 2, n, "steady.min_periods must be >= 2");
                   }
                   if (k == "max_periods") {
                       rd.scalar(n, k, s.max_periods);
                       rd.require(s.max_periods >= 2, n, "steady.max_periods must be >= 2");
                   }
                   if (k == "confirm_periods") {
                       rd.scalar(n, k, s.confirm_periods);
                       rd.require(s.confirm_periods >= 1, n, "steady.confirm_periods must be >= 1");
                   }
               });
    if (c.steady.max_periods < c.steady.min_periods)
        rd.error(root["steady"], "steady.max_periods must be >= steady.min_periods");

    rd.section(root["snapshots"], "snapshots", {"every_fs", "max_count"},
               [&](const std::string& k, const YAML::Node& n) {
                   if (k == "every_fs") {
                       rd.scalar(n, k, c.snapshots.every_fs);
                       non_negative(n, "snapshots.every_fs", c.snapshots.every_fs);
                   } else {
                       rd.scalar(n, k, c.snapshots.max_count);
                       rd.require(c.snapshots.max_count >= 0, n, "snapshots.max_count must be >= 0");
                   }
               });

    rd.section(root["sweep"], "sweep", {"kind", "r_mw_nm", "r_df_nm", "edge_radius_nm", "lambda_nm", "df_index", "optimize"},
               [&](const std::string& k, const YAML::Node& n) {
                   auto& s = c.sweep;
                   if (k == "kind") {
                       rd.scalar(n, k, s.kind);
                       rd.require(s.kind == "radius_map" || s.kind == "rounding" || s.kind == "wavelength" ||
                                      s.kind == "index",
                                  n, "sweep.kind must be radius_map, rounding, wavelength or index");
                       return;
                   }
                   if (k == "optimize") {
                       rd.scalar(n, k, s.optimize);
                       return;
                   }
                   auto& v = k == "r_mw_nm"          ? s.r_mw_nm
                             : k == "r_df_nm"        ? s.r_df_nm
                             : k == "edge_radius_nm" ? s.edge_radius_nm
                             : k == "lambda_nm"      ? s.lambda_nm
                                                     : s.df_index;
                   rd.list(n, "sweep." + k, v);
                   for (double x : v) {
                       if (k == "edge_radius_nm") non_negative(n, "sweep." + k + " entries", x);
                       else if (k == "df_index") rd.require(x >= 1.0, n, "sweep.df_index entries must be >= 1");
                       else positive(n, "sweep." + k + " entries", x);
                   }
               });

    rd.section(root["optimize"], "optimize", {"seed_span", "seed_step_nm", "steps_nm", "max_moves"},
               [&](const std::string& k, const YAML::Node& n) {
                   auto& o = c.optimize;
                   if (k == "seed_span") {
                       rd.scalar(n, k, o.seed_span);
                       rd.require(o.seed_span > 0.0 && o.seed_span < 1.0, n, "optimize.seed_span must be in (0, 1)");
                   }
                   if (k == "seed_step_nm") {
                       rd.scalar(n, k, o.seed_step_nm);
                       positive(n, "optimize.seed_step_nm", o.seed_step_nm);
                   }
                   if (k == "steps_nm") {
                       rd.list(n, "optimize.steps_nm", o.steps_nm);
                       rd.require(!o.steps_nm.empty(), n, "optimize.steps_nm must not be empty");
                       for (double x : o.steps_nm) positive(n, "optimize.steps_nm entries", x);
                   }
                   if (k == "max_moves") {
                       rd.scalar(n, k, o.max_moves);
                       rd.require(o.max_moves >= 1, n, "optimize.max_moves must be >= 1");
                   }
               });

    rd.section(root["convergence"], "convergence", {"pitches_nm"}, [&](const std::string& k, const YAML::Node& n) {
        rd.list(n, "convergence." + k, c.convergence.pitches_nm);
        rd.require(c.convergence.pitches_nm.size() >= 2, n, "convergence.pitches_nm needs at least two pitches");
        for (double x : c.convergence.pitches_nm) positive(n, "convergence.pitches_nm entries", x);
    });

    rd.section(root["snom"], "snom", {"mode", "allow_coarse_gap"}, [&](const std::string& k, const YAML::Node& n) {
        if (k == "mode") {
            rd.scalar(n, k, c.snom.mode);
            rd.require(c.snom.mode == "illuminate" || c.snom.mode == "collect", n,
                       "snom.mode must be illuminate or collect");
        } else {
            rd.scalar(n, k, c.snom.allow_coarse_gap);
        }
    });

    rd.section(root["output"], "output", {"dir", "threads"}, [&](const std::string& k, const YAML::Node& n) {
        if (k == "dir") {
            rd.scalar(n, k, c.output.dir);
        } else {
            rd.scalar(n, k, c.output.threads);
            rd.require(c.output.threads >= 1, n, "output.threads must be >= 1");
        }
    });

    if (!errors.empty()) {
        std::string msg = "invalid config";
        for (const auto& e : errors) msg += "\n  " + e;
        throw Error(ErrorKind::Config, msg);
    }
    return c;
}

/// YAML text that parses back to an identical RunConfig. Numbers use the
/// shortest round-trip form so serialising twice is byte-stable.
inline std::string serialize_config(const RunConfig& c)
{
    using experiments::fmt;
    std::ostringstream s;
    auto list = [&](const std::vector<double>& v) {
        std::string out = "[";
        for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + fmt(v[k]);
        return out + "]";
    };
    auto str = [](const std::string& x) {
        YAML::Emitter e;
        e << YAML::DoubleQuoted << x;
        return std::string(e.c_str());
    };
    auto flag = [](bool b) { return b ? "true" : "false"; };
    const auto& m = c.materials;
    s << "materials:\n"
      << "  data_dir: " << str(m.data_dir) << "\n"
      << "  metal: " << str(m.metal) << "\n"
      << "  dataset: " << str(m.dataset) << "\n"
      << "  dielectric_index: " << fmt(m.dielectric_index) << "\n";
    const auto& g = c.geometry;
    s << "geometry:\n"
      << "  kind: " << g.kind << "\n"
      << "  lambda_nm: " << fmt(g.lambda_nm) << "\n"
      << "  r_mw_nm: " << fmt(g.r_mw_nm) << "\n"
      << "  r_df_nm: " << fmt(g.r_df_nm) << "\n"
      << "  gap_nm: " << fmt(g.gap_nm) << "\n"
      << "  edge_radius_nm: " << fmt(g.edge_radius_nm) << "\n"
      << "  direction: " << g.direction << "\n"
      << "  df_radius_nm: " << fmt(g.df_radius_nm) << "\n"
      << "  cone_base_radius_nm: " << fmt(g.cone_base_radius_nm) << "\n"
      << "  opening_angle_deg: " << fmt(g.opening_angle_deg) << "\n"
      << "  full_angle: " << flag(g.full_angle) << "\n"
      << "  apex_radius_nm: " << fmt(g.apex_radius_nm) << "\n"
      << "  tip_substrate_gap_nm: " << fmt(g.tip_substrate_gap_nm) << "\n"
      << "  substrate_index: " << fmt(g.substrate_index) << "\n"
      << "  emitter_depth_nm: " << fmt(g.emitter_depth_nm) << "\n";
    s << "grid:\n"
      << "  pitch_nm: " << fmt(c.grid.pitch_nm) << "\n"
      << "  courant: " << fmt(c.grid.courant) << "\n"
      << "  pml_cells: " << c.grid.pml_cells << "\n"
      << "  align_to_wire: " << flag(c.grid.align_to_wire) << "\n";
    s << "source:\n  ramp_periods: " << fmt(c.source.ramp_periods) << "\n";
    s << "monitors:\n";
    if (c.monitors.offset_nm) s << "  offset_nm: " << fmt(*c.monitors.offset_nm) << "\n";
    s << "  box_half_size_nm: " << fmt(c.monitors.box_half_size_nm) << "\n";
    s << "steady:\n"
      << "  tolerance: " << fmt(c.steady.tolerance) << "\n"
      << "  min_periods: " << c.steady.min_periods << "\n"
      << "  max_periods: " << c.steady.max_periods << "\n"
      << "  confirm_periods: " << c.steady.confirm_periods << "\n";
    s << "snapshots:\n"
      << "  every_fs: " << fmt(c.snapshots.every_fs) << "\n"
      << "  max_count: " << c.snapshots.max_count << "\n";
    const auto& w = c.sweep;
    s << "sweep:\n"
      << "  kind: " << w.kind << "\n"
      << "  r_mw_nm: " << list(w.r_mw_nm) << "\n"
      << "  r_df_nm: " << list(w.r_df_nm) << "\n"
      << "  edge_radius_nm: " << list(w.edge_radius_nm) << "\n"
      << "  lambda_nm: " << list(w.lambda_nm) << "\n"
      << "  df_index: " << list(w.df_index) << "\n"
      << "  optimize: " << flag(w.optimize) << "\n";
    s << "optimize:\n"
      << "  seed_span: " << fmt(c.optimize.seed_span) << "\n"
      << "  seed_step_nm: " << fmt(c.optimize.seed_step_nm) << "\n"
      << "  steps_nm: " << list(c.optimize.steps_nm) << "\n"
      << "  max_moves: " << c.optimize.max_moves << "\n";
    s << "convergence:\n  pitches_nm: " << list(c.convergence.pitches_nm) << "\n";
    s << "snom:\n"
      << "  mode: " << c.snom.mode << "\n"
      << "  allow_coarse_gap: " << flag(c.snom.allow_coarse_gap) << "\n";
    s << "output:\n"
      << "  dir: " << str(c.output.dir) << "\n"
      << "  threads: " << c.output.threads << "\n";
    return s.str();
}

}  // namespace nc::io
