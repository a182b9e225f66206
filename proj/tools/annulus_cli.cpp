#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "annulus/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "annulus: Melnikov analysis and return-map integration for "
        "piecewise-linear perturbations of a planar center"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path;
    std::string out_dir;
    int jobs = 0;
    double tol = 0.0;
    unsigned long long seed = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "run configuration (JSON)")
        ->required();
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--jobs", jobs, "worker threads for sweeps");
    app.add_option("--tol", tol, "quadrature tolerance override");
    app.add_option("--seed", seed, "seed recorded with the outputs")
        ->each([&seed_set](const std::string&) { seed_set = true; });

    auto* melnikov = app.add_subcommand("melnikov", "Melnikov sweep over r");
    auto* displacement =
        app.add_subcommand("displacement", "displacement sweep over (r, eps)");
    auto* fit = app.add_subcommand("fit", "fit the eps-expansion of d");
    auto* search = app.add_subcommand("search", "root search for limit cycles");
    auto* simulate = app.add_subcommand("simulate", "event-resolved trajectory");
    auto* report = app.add_subcommand("report", "aggregated evidence report");

    CLI11_PARSE(app, argc, argv);

    annulus::RunConfig config;
    try {
        config = annulus::load_config(config_path);
    } catch (const annulus::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (jobs > 0) config.jobs = jobs;
    if (tol > 0.0) config.quad_tol = tol;
    if (seed_set) config.seed = seed;

    if (melnikov->parsed()) return annulus::cmd_melnikov(config);
    if (displacement->parsed()) return annulus::cmd_displacement(config);
    if (fit->parsed()) return annulus::cmd_fit(config);
    if (search->parsed()) return annulus::cmd_search(config);
    if (simulate->parsed()) return annulus::cmd_simulate(config);
    if (report->parsed()) return annulus::cmd_report(config);
    return 2;
}
