/*
* Copyright (C) 2026 The wolbachia-release authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#include "wolbachia/errors.hpp"
#include "wolbachia/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <utility>

namespace
{

enum ExitCode
{
    ok            = 0,
    config_error  = 1,
    numeric_error = 2,
};

std::vector<double> parse_list(const std::string& text, const std::string& flag)
{
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        }
        catch (const std::exception&) {
            throw wolbachia::ConfigError({flag + ": cannot parse '" + item + "' as a number"});
        }
    }
    if (out.empty()) {
        throw wolbachia::ConfigError({flag + ": expected at least one value"});
    }
    return out;
}

struct Overrides {
    std::string config_path;
    std::optional<std::string> out, eps, budget;
    std::optional<double> dt, kappa;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
};

wolbachia::RunConfig resolve(const Overrides& o)
{
    wolbachia::RunConfig c = o.config_path.empty() ? wolbachia::RunConfig{} : wolbachia::load_config(o.config_path);
    if (o.out) c.out_dir = *o.out;
    if (o.eps) {
        // a single value sets the run eps, a list also replaces the sweep list
        const auto list = parse_list(*o.eps, "--eps");
        c.model.eps = list.front();
        c.eps_list  = list;
    }
    if (o.budget) {
        const auto list = parse_list(*o.budget, "--c-budget");
        c.budget      = list.front();
        c.budget_list = list;
    }
    if (o.dt) c.dt = *o.dt;
    if (o.kappa) c.kappa = *o.kappa;
    if (o.jobs) c.jobs = *o.jobs;
    if (o.seed) c.seed = *o.seed;
    c.validate();
    return c;
}

int run(const std::string& command, const Overrides& o)
{
    using namespace wolbachia;
    const RunConfig config = resolve(o);
    if (command == "steady-states") {
        std::cout << cmd_steady_states(config);
    }
    else if (command == "simulate") {
        std::cout << cmd_simulate(config);
    }
    else if (command == "solve-reduced") {
        std::cout << cmd_solve_reduced(config);
    }
    else if (command == "optimize-full") {
        std::cout << cmd_optimize_full(config);
    }
    else if (command == "sweep-eps") {
        std::cout << cmd_sweep_eps(config);
    }
    else if (command == "sweep-c") {
        std::cout << cmd_sweep_c(config);
    }
    else if (command == "check") {
        bool all = true;
        for (const auto& line : cmd_check(config)) {
            std::cout << (line.passed ? "PASS " : "FAIL ") << line.name << ": " << line.detail << '\n';
            all = all && line.passed;
        }
        return all ? ok : numeric_error;
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optimal release strategies for Wolbachia population replacement"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config_path, "JSON run configuration (defaults apply when omitted)");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--eps", o.eps, "eps value or comma-separated eps list");
    app.add_option("--c-budget", o.budget, "budget C or comma-separated list of budgets");
    app.add_option("--dt", o.dt, "time step (default depends on eps)");
    app.add_option("--kappa", o.kappa, "structure classification threshold");
    app.add_option("--jobs", o.jobs, "worker threads");
    app.add_option("--seed", o.seed, "seed for random initial controls");

    const std::pair<const char*, const char*> commands[] = {
        {"steady-states", "steady states, eigenvalues and stability labels"},
        {"simulate", "integrate one system under a given control"},
        {"solve-reduced", "closed-form optimal release for the reduced problem"},
        {"optimize-full", "projected-gradient optimization of the slow-fast problem"},
        {"sweep-eps", "optimize over eps_list and compare with the reduced optimum"},
        {"sweep-c", "reduced outcome over C_list and the threshold budget"},
        {"check", "run the built-in consistency checks"},
    };
    for (const auto& [name, description] : commands) {
        app.add_subcommand(name, description);
    }

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        return run(command, o);
    }
    catch (const wolbachia::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return config_error;
    }
    catch (const wolbachia::HorizonTooShort& e) {
        std::cerr << "configuration: " << e.what() << '\n';
        return config_error;
    }
    catch (const wolbachia::InsufficientFlux& e) {
        std::cerr << "configuration: " << e.what() << '\n';
        return config_error;
    }
    catch (const wolbachia::NoCoexistence& e) {
        std::cerr << "configuration: " << e.what() << '\n';
        return config_error;
    }
    catch (const std::invalid_argument& e) {
        std::cerr << "configuration: " << e.what() << '\n';
        return config_error;
    }
    catch (const wolbachia::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numeric_error;
    }
    catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return numeric_error;
    }
}
