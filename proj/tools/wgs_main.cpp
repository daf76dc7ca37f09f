#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wgs/errors.hpp"
#include "wgs/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Variational ground states from superpositions of weighted graph states"};
    app.require_subcommand(1);

    std::string config_path;
    wgs::RunOptions options;
    app.add_option("--config", config_path, "experiment config file")->required();
    app.add_option("--jobs", options.jobs, "concurrent field points (cold starts only)")->check(CLI::PositiveNumber);
    app.add_flag("--cold-start", options.cold_start, "optimize every field point from a fresh start");
    app.add_option("--out", options.out_dir, "output directory (overrides [outputs] directory)");

    app.add_subcommand("optimize", "single run per field: checkpoint, trace and energies per m");
    app.add_subcommand("sweep-field", "loop over fields, warm-starting from the previous optimum");
    app.add_subcommand("compare-exact", "optimize and compare with exact diagonalization");
    app.add_subcommand("anderson", "Anderson lower bound per field");
    app.add_subcommand("reduce", "dump the reduced density of [outputs] reduce_sites");
    app.fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    wgs::ExperimentConfig config;
    try {
        config = wgs::load_config(config_path);
        wgs::apply_environment(config);
    } catch (const wgs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    if (options.jobs > 1 && !options.cold_start && app.get_subcommands().front()->get_name() == "sweep-field")
        std::cerr << "note: --jobs applies only with --cold-start; warm-started sweeps run in field order\n";
    return wgs::execute(app.get_subcommands().front()->get_name(), config, options, std::cerr);
}
