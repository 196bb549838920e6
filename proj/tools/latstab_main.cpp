// Command-line front end: scenario simulation, frequency-domain analysis, and
// learning-gain design, driven by block-structured config files.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "latstab/latstab.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "scenario configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (default: from [outputs])");
    cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

int run(int (*fn)(const latstab::ScenarioConfig&, const std::string&, bool, std::ostream&),
        const CommonArgs& args) {
    latstab::ScenarioConfig cfg;
    try {
        cfg = latstab::ScenarioConfig::load(args.config_path);
    } catch (const latstab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return latstab::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << args.config_path << ": " << e.what() << "\n";
        return latstab::kExitConfigError;
    }
    const std::string out_dir = args.out_dir.empty() ? cfg.outputs.directory : args.out_dir;
    try {
        return fn(cfg, out_dir, args.quiet, std::cerr);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return latstab::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return latstab::kExitConfigError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lateral string stability toolkit for vehicle platoons"};
    app.require_subcommand(1);

    CommonArgs sim_args, ana_args, des_args;
    CLI::App* sim = app.add_subcommand("simulate", "integrate the platoon and write CSV outputs");
    add_common(sim, sim_args);
    CLI::App* ana = app.add_subcommand("analyze", "emit the frequency-domain certificate");
    add_common(ana, ana_args);
    CLI::App* des = app.add_subcommand("design", "search learning gains passing the certificate");
    add_common(des, des_args);

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return run(&latstab::cmd_simulate, sim_args);
    if (ana->parsed()) return run(&latstab::cmd_analyze, ana_args);
    if (des->parsed()) return run(&latstab::cmd_design, des_args);
    return latstab::kExitConfigError;
}
