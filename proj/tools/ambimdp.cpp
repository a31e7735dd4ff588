// Command-line front end: solve, figure and simulate subcommands driven by a
// config file. Exit status: 0 success, 1 config error, 2 solver guard.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ambimdp/config.hpp"
#include "ambimdp/run.hpp"

namespace {

using ambimdp::cli::ConfigError;
using ambimdp::cli::RunConfig;
using ambimdp::cli::RunMode;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path);
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-horizon Bayesian MDP solver under model ambiguity"};
    app.require_subcommand(1);

    std::string config_path, out_path, traj_path;
    std::optional<std::uint64_t> seed;

    auto* solve = app.add_subcommand("solve", "bayes / entropic / avar / robust modes");
    solve->add_option("--config", config_path, "config file")->required();
    solve->add_option("--out", out_path, "JSON result path (overrides output.path)");

    auto* figure = app.add_subcommand("figure", "figure-entropic / figure-avar sweeps");
    figure->add_option("--config", config_path, "config file")->required();
    figure->add_option("--out", out_path, "CSV path (overrides output.path; default stdout)");

    auto* simulate = app.add_subcommand("simulate", "exact vs Monte-Carlo policy evaluation");
    simulate->add_option("--config", config_path, "config file")->required();
    simulate->add_option("--seed", seed, "random seed (overrides solver.seed)");
    simulate->add_option("--out", out_path, "CSV report path (overrides output.path)");
    simulate->add_option("--trajectories", traj_path, "dump enumerated trajectories as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = ambimdp::cli::parse_config(read_file(config_path));
        if (!out_path.empty()) cfg.output_path = out_path;
        if (!traj_path.empty()) cfg.trajectories_path = traj_path;
        if (seed) cfg.seed = *seed;

        const bool ok = (solve->parsed() && (cfg.mode == RunMode::bayes || cfg.mode == RunMode::entropic ||
                                             cfg.mode == RunMode::avar || cfg.mode == RunMode::robust)) ||
                        (figure->parsed() && ambimdp::cli::is_figure(cfg.mode)) ||
                        (simulate->parsed() && cfg.mode == RunMode::simulate);
        if (!ok)
            throw ConfigError("mode `" + ambimdp::cli::to_string(cfg.mode) + "` does not belong to this subcommand");

        const auto art = ambimdp::cli::run(cfg);
        std::cout << art.summary;
        if (figure->parsed() && cfg.output_path.empty()) std::cout << art.primary;
        if (!cfg.output_path.empty()) write_file(cfg.output_path, art.primary);
        else if (simulate->parsed()) std::cout << art.primary;
        if (!cfg.trajectories_path.empty()) write_file(cfg.trajectories_path, art.trajectories);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ambimdp::GuardError& e) {
        std::cerr << "solver guard: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
