#include <CLI11.hpp>

#include <iostream>

#include "nanocoupler/io/dispatch.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Axisymmetric FDTD and mode solvers for nanowire/fibre butt coupling"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<double> pitch;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    bool quiet = false;

    const std::map<std::string, std::string> help = {
        {"modes", "solve the wire SPP and fibre TM01 modes, write profiles"},
        {"match", "mode-matching estimate over one point or a radius grid"},
        {"run", "one butt-joint FDTD run (eta, R)"},
        {"sweep", "radius map, rounding scan, spectrum or fibre-index sweep"},
        {"optimize", "seeded FDTD radius optimisation"},
        {"snom", "nanocone SNOM tip: gap enhancement or collection efficiency"},
        {"convergence", "eta at a list of grid pitches"},
    };
    for (const auto& name : nc::io::subcommands()) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("-c,--config", config_path, "YAML run config, or a manifest.json to reproduce")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--pitch-nm", pitch, "override grid.pitch_nm");
        sub->add_option("--out-dir", out_dir, "override output.dir");
        sub->add_option("--threads", threads, "override output.threads");
        sub->add_flag("-q,--quiet", quiet, "suppress progress lines");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();
    nc::log::set_quiet(quiet);

    nc::io::RunConfig cfg;
    try {
        cfg = nc::io::parse_config(nc::io::load_config_text(config_path));
        if (pitch) cfg.grid.pitch_nm = *pitch;
        if (out_dir) cfg.output.dir = *out_dir;
        if (threads) cfg.output.threads = *threads;
        // Overrides go through the same validation as the file.
        cfg = nc::io::parse_config(nc::io::serialize_config(cfg));
    } catch (const nc::Error& e) {
        std::cerr << nc::io::error_json(std::string(nc::to_string(e.kind())), e.what()).dump() << "\n";
        return 2;
    }
    return nc::io::dispatch(command, cfg);
}
