#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "frontlab/config.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/stages.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for bistable fronts crossing a heterogeneous transition zone"};
    std::string command, config_path, out_dir;
    unsigned threads = 1;
    std::string choices;
    for (const auto& s : frontlab::stage_names()) choices += s + "|";
    app.add_option("command", command, "Stage to run: " + choices + "all")->required();
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    app.add_option("--out", out_dir, "Output directory (overrides output_dir in the config)");
    app.add_option("--threads", threads, "Worker threads for independent runs")->check(CLI::Range(1u, 256u));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    frontlab::RunConfig cfg;
    try {
        cfg = frontlab::RunConfig::load(config_path);
    } catch (const frontlab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (out_dir.empty()) out_dir = cfg.output_dir;
    return frontlab::run_command(command, cfg, out_dir, threads, std::cerr);
}
