#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "urnldp/cli.hpp"

using namespace urnldp;

int main(int argc, char** argv) {
    CLI::App app{"Large-deviation toolkit for generalized Polya-type urns"};
    std::string command, spec, event, out, format;
    std::size_t N = 0, T = 0, runs = 1;
    std::uint64_t seed = 0;
    int grid = 0, threads = 1, K = 0;
    double floor = 0.0;

    app.add_option("command", command,
                   "validate | simulate | exact-dist | mogulskii-table | lagrangian-table | "
                   "rate-endpoint | zero-cost | compare-cramer | verify")
        ->required();
    auto* o_spec = app.add_option("--spec", spec, "urn specification (JSON)");
    auto* o_N = app.add_option("--N", N, "number of urn steps");
    auto* o_T = app.add_option("--T", T, "path grid size");
    app.add_option("--seed", seed, "master seed");
    auto* o_grid = app.add_option("--grid", grid, "table grid size");
    app.add_option("--floor", floor, "probability floor inside logarithms");
    auto* o_event = app.add_option("--event", event, "endpoint event LO,HI");
    auto* o_out = app.add_option("--out", out, "output file (default stdout)");
    auto* o_format = app.add_option("--format", format, "csv | json");
    app.add_option("--threads", threads, "worker threads");
    auto* o_K = app.add_option("--K", K, "capacity for mogulskii-table without a spec");
    app.add_option("--runs", runs, "simulate: number of histories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kConfigError;
    }

    cli::RunConfig cfg;
    try {
        cfg.command = cli::parse_command(command);
        if (*o_spec) cfg.spec_path = spec;
        if (*o_N) cfg.N = N;
        if (*o_T) cfg.T = T;
        cfg.seed = seed;
        if (*o_grid) cfg.grid = grid;
        cfg.floor = floor;
        if (*o_event) cfg.event = cli::parse_event(event);
        if (*o_out) cfg.out_path = out;
        if (*o_format) cfg.format = cli::parse_format(format);
        cfg.threads = threads;
        if (*o_K) cfg.K = K;
        cfg.runs = runs;
    } catch (const cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kConfigError;
    }
    return cli::run_guarded(cfg, std::cout, std::cerr);
}
