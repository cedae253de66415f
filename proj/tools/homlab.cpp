#include <iostream>

#include <CLI11.hpp>

#include "homlab/cli.hpp"

int main(int argc, char** argv) {
    using namespace homlab::cli;
    RunConfig config;
    CLI::App app("Countable homogeneous structures laboratory");
    app.usage(usage());
    app.add_option("command", config.command, "command words, e.g. gagb or irs realize")->required();
    app.add_option("--catalog", config.catalog, "catalog token");
    app.add_option("--sampler", config.sampler, "sampler token");
    app.add_option("--window", config.window, "window size");
    app.add_option("--trials", config.trials, "number of trials");
    app.add_option("--seed", config.seed, "64-bit seed");
    app.add_option("--significance", config.significance, "test level");
    app.add_option("--out", config.output, "write JSON lines to this file");
    app.add_option("--threads", config.threads, "worker threads (0: all cores)");
    app.add_flag("--per-trial", config.per_trial, "emit one record per trial before the summary");
    std::map<std::string, std::string> values;
    for (const auto& [name, help] : option_flags()) app.add_option("--" + name, values[name], help);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << usage();
        return kExitInputError;
    }
    for (const auto& [name, _] : option_flags())
        if (app.get_option("--" + name)->count() > 0) config.options[name] = values[name];
    return run(config, std::cout, std::cerr);
}
