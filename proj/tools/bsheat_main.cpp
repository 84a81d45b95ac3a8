#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bsheat/config.hpp"
#include "bsheat/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Semilinear heat-equation solver with certified Picard iteration"};

    std::string config_path;
    std::string output_dir;
    int verbosity = 1;
    bool list_nl = false;
    bool print_constants = false;

    app.add_option("-c,--config", config_path, "Path to a JSON run configuration");
    app.add_option("-o,--output-dir", output_dir,
                   "Override the output directory from the config");
    app.add_option("-v,--verbosity", verbosity, "0 silent, 1 per-task lines, 2 details")
        ->check(CLI::Range(0, 2));
    app.add_flag("--list-nonlinearities", list_nl, "Print the nonlinearity catalog");
    app.add_flag("--print-constants-table", print_constants,
                 "Print kernel norm constants and scaling exponents");

    CLI11_PARSE(app, argc, argv);

    if (list_nl) {
        bsheat::print_nonlinearities(std::cout);
        return 0;
    }
    if (print_constants) {
        bsheat::print_constants_table(std::cout);
        return 0;
    }
    if (config_path.empty()) {
        std::cerr << "error: --config is required (or use --list-nonlinearities / "
                     "--print-constants-table)\n";
        return 1;
    }

    try {
        const bsheat::RunConfig cfg = bsheat::parse_config_file(config_path);
        const bsheat::RunOutcome outcome =
            bsheat::run(cfg, output_dir, verbosity, verbosity > 0 ? &std::cout : nullptr);
        if (verbosity > 0)
            std::cout << "outputs written to " << outcome.output_dir
                      << " (config " << outcome.manifest_hash << ")\n";
        return outcome.all_passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
