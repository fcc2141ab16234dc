#include "lctune/error.hpp"
#include "lctune/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Liquid-crystal tunable antenna substrate simulator"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "INI configuration file");
        sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
        sub->add_option("--jobs", jobs, "Concurrent sweep points (cold starts only)")->check(CLI::PositiveNumber);
    };
    auto* materials = app.add_subcommand("materials", "List the built-in materials");
    auto* freedericksz = app.add_subcommand("freedericksz", "Permittivity versus voltage sweep");
    auto* tune = app.add_subcommand("tune", "Sweep plus antenna tuning curve and band report");
    auto* optics = app.add_subcommand("optics", "2D grid-electrode solve and transmittance profile");
    auto* spiral = app.add_subcommand("spiral", "Spiral antenna polyline");
    auto* s11 = app.add_subcommand("s11", "S11 curve of the calibrated antenna model");
    for (auto* sub : {freedericksz, tune, optics, spiral, s11}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lctune::kExitConfig;
    }

    try {
        const auto table = lctune::MaterialTable::builtin();
        if (*materials) {
            lctune::cmd_materials(table, std::cout);
            return lctune::kExitOk;
        }
        lctune::CommandEnv env;
        env.config = config_path.empty() ? lctune::default_config()
                                         : lctune::load_config(config_path, table);
        if (!out_dir.empty()) env.config.output_dir = out_dir;
        env.out_dir = env.config.output_dir;
        env.jobs = jobs;
        env.log = &std::cout;
        if (*freedericksz) lctune::cmd_freedericksz(env);
        else if (*tune) lctune::cmd_tune(env);
        else if (*optics) lctune::cmd_optics(env);
        else if (*spiral) lctune::cmd_spiral(env);
        else if (*s11) lctune::cmd_s11(env);
        return lctune::kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lctune::exit_code_for(e);
    }
}
