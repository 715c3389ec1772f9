#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bbmdg/bbmdg.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Energy-preserving moving-mesh BBM experiments"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
    std::string config_path;
    std::vector<std::string> overrides;
    bool quiet = false;
    run_cmd->add_option("config", config_path, "Config file (key = value lines)")->required();
    run_cmd->add_option("--override", overrides, "Override a config entry, key=value (repeatable)")
        ->allow_extra_args(false);
    run_cmd->add_flag("--quiet", quiet, "Suppress progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot read config '" << config_path << "'\n";
        return 1;
    }
    std::stringstream text;
    text << in.rdbuf();

    bbmdg::RunConfig cfg;
    try {
        cfg = bbmdg::parse_config(text.str(), overrides);
    } catch (const bbmdg::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return 1;
    }

    const auto result = bbmdg::run(cfg, quiet ? nullptr : &std::cerr);
    if (result.status != bbmdg::ExitStatus::ok) {
        std::cerr << "error: " << result.message << '\n';
    } else if (!quiet) {
        std::cerr << "wrote " << result.series.size() << " series rows to " << cfg.output_dir
                  << '\n';
    }
    return static_cast<int>(result.status);
}
