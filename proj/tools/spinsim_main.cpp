#include "spinsim/config.hpp"
#include "spinsim/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spinsim: thermalization and dynamical decoupling experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string oracle_name;
    int workers = 1;

    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "experiment configuration file")
        ->required();
    run->add_option("--workers", workers, "worker thread count")
        ->check(CLI::PositiveNumber);

    CLI::App* validate = app.add_subcommand("validate", "parse a config only");
    validate->add_option("config", config_path, "experiment configuration file")
        ->required();

    CLI::App* oracle = app.add_subcommand(
        "oracle", "print reference values for the pinned instances");
    oracle->add_option("name", oracle_name, "gqme | visits | dd | echo | all")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            spinsim::RunOptions opts;
            opts.workers = workers;
            if (const char* root = std::getenv("SPINSIM_OUTPUT_ROOT"))
                opts.output_root = root;
            const spinsim::Config cfg = spinsim::Config::parse_file(config_path);
            const std::string dir = spinsim::run_and_write(cfg, opts);
            std::cout << "wrote " << dir << "\n";
        } else if (validate->parsed()) {
            const spinsim::Config cfg = spinsim::Config::parse_file(config_path);
            spinsim::validate_config(cfg);
            std::cout << "ok\n";
        } else if (oracle->parsed()) {
            std::cout << spinsim::run_oracle(oracle_name);
        }
    } catch (const spinsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericError;
    }
    return kExitOk;
}
