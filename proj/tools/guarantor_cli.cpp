#include "guarantor/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    namespace cli = guarantor::cli;
    CLI::App app{"Risk-constrained portfolio insurance planner"};
    app.require_subcommand(1);

    std::string config;
    std::string solution;
    std::string instance;
    std::string param;
    std::string values;

    auto* solve = app.add_subcommand("solve", "solve a config and write solution.json and payoff.csv");
    solve->add_option("config", config, "config JSON")->required();

    auto* verify = app.add_subcommand("verify", "Monte Carlo check of a solution");
    verify->add_option("config", config, "config JSON")->required();
    verify->add_option("solution", solution, "solution JSON")->required();

    auto* oracle = app.add_subcommand("oracle", "enumerate all gains sets of a discrete instance");
    oracle->add_option("instance", instance, "instance JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "sweep one parameter");
    sweep->add_option("config", config, "config JSON")->required();
    sweep->add_option("--param", param, "c-grid, rho0, delta or beta")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kError;
    }

    if (*solve) return cli::cmd_solve(config, std::cout, std::cerr);
    if (*verify) return cli::cmd_verify(config, solution, std::cout, std::cerr);
    if (*oracle) return cli::cmd_oracle(instance, std::cout, std::cerr);
    return cli::cmd_sweep(config, param, values, std::cout, std::cerr);
}
