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
#include "wolbachia/harness.hpp"

#include "wolbachia/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace wolbachia
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

std::string join_problems(const std::vector<std::string>& problems)
{
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) {
        msg += "\n  - " + p;
    }
    return msg;
}

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------------------------
// JSON reading with accumulated diagnostics

class Reader
{
public:
    explicit Reader(std::vector<std::string>& problems)
        : m_problems(problems)
    {
    }

    /// Checks that obj is an object whose keys are all listed in allowed.
    bool object(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
    {
        if (!obj.is_object()) {
            m_problems.push_back(where + " must be an object");
            return false;
        }
        for (const auto& [key, value] : obj.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                m_problems.push_back("unknown key " + where + "." + key);
            }
        }
        return true;
    }

    void number(const json& obj, const char* key, const std::string& where, double& target)
    {
        if (!obj.contains(key)) {
            return;
        }
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            m_problems.push_back(where + "." + key + " must be a number");
            return;
        }
        target = v.get<double>();
    }

    void optional_number(const json& obj, const char* key, const std::string& where, std::optional<double>& target)
    {
        if (!obj.contains(key) || obj.at(key).is_null()) {
            return;
        }
        double v = 0.0;
        number(obj, key, where, v);
        if (obj.at(key).is_number()) {
            target = v;
        }
    }

    template <class Int>
    void integer(const json& obj, const char* key, const std::string& where, Int& target)
    {
        if (!obj.contains(key)) {
            return;
        }
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) {
            m_problems.push_back(where + "." + key + " must be an integer");
            return;
        }
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.is_number_unsigned()) {
                target = v.get<Int>();
            }
            else {
                m_problems.push_back(where + "." + key + " must be non-negative");
            }
        }
        else {
            target = v.get<Int>();
        }
    }

    void number_list(const json& obj, const char* key, const std::string& where, std::vector<double>& target)
    {
        if (!obj.contains(key)) {
            return;
        }
        const auto& v = obj.at(key);
        if (!v.is_array() || std::any_of(v.begin(), v.end(), [](const json& e) { return !e.is_number(); })) {
            m_problems.push_back(where + "." + key + " must be an array of numbers");
            return;
        }
        target = v.get<std::vector<double>>();
    }

    void string(const json& obj, const char* key, const std::string& where, std::string& target)
    {
        if (!obj.contains(key)) {
            return;
        }
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            m_problems.push_back(where + "." + key + " must be a string");
            return;
        }
        target = v.get<std::string>();
    }

private:
    std::vector<std::string>& m_problems;
};

const char* system_name(SystemKind s)
{
    switch (s) {
    case SystemKind::full:
        return "full";
    case SystemKind::slowfast:
        return "slowfast";
    case SystemKind::reduced:
        return "reduced";
    }
    return "full";
}

const char* control_name(ControlSource c)
{
    switch (c) {
    case ControlSource::zero:
        return "zero";
    case ControlSource::file:
        return "file";
    case ControlSource::analytic:
        return "analytic";
    }
    return "analytic";
}

// ---------------------------------------------------------------------------------------------
// output helpers

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::string control_csv(const ControlSignal& u)
{
    std::string s = "t,u\n";
    for (std::size_t k = 0; k < u.values.size(); ++k) {
        s += format_double(u.grid.node(k)) + ',' + format_double(u.values[k]) + '\n';
    }
    return s;
}

/// Re-validates the box and the budget before anything reaches disk.
void write_control(const fs::path& path, const ControlSignal& u, double max_flux, double budget)
{
    if (!u.is_feasible(max_flux, budget)) {
        throw NumericalError("refusing to write infeasible control to " + path.string());
    }
    write_file(path, control_csv(u));
}

template <int Dim>
std::string trajectory_csv(const Trajectory<Dim>& traj)
{
    std::string s = Dim == 1 ? "t,x1\n" : "t,x1,x2\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        s += format_double(traj.grid.node(k));
        for (int i = 0; i < Dim; ++i) {
            s += ',' + format_double(traj.states[k][i]);
        }
        s += '\n';
    }
    return s;
}

std::string switching_csv(const ControlSignal& u, const SwitchingReport& r)
{
    std::string s = "t,u,w,lambda_est\n";
    for (std::size_t k = 0; k < u.values.size(); ++k) {
        s += format_double(u.grid.node(k)) + ',' + format_double(u.values[k]) + ',' + format_double(r.w[k]) + ',' +
             format_double(r.lambda_estimate) + '\n';
    }
    return s;
}

void embed_config(const RunConfig& config)
{
    write_file(fs::path(config.out_dir) / "config.json", config_to_json(config));
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

ControlSignal read_control_file(const std::string& path, const TimeGrid& grid)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"cannot read control file " + path});
    }
    std::string line;
    std::getline(in, line);
    if (line != "t,u" && line != "t,u\r") {
        throw ConfigError({"control file " + path + " must start with the header t,u"});
    }
    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto comma = line.find(',');
        try {
            if (comma == std::string::npos) {
                throw std::invalid_argument("missing column");
            }
            std::size_t used = 0;
            values.push_back(std::stod(line.substr(comma + 1), &used));
        }
        catch (const std::exception&) {
            throw ConfigError({"control file " + path + ": cannot parse row " + std::to_string(row)});
        }
    }
    if (values.size() != grid.num_steps()) {
        throw ConfigError({"control file " + path + " has " + std::to_string(values.size()) + " rows, the grid has " +
                           std::to_string(grid.num_steps()) + " cells"});
    }
    return ControlSignal(grid, std::move(values));
}

PopulationState full_initial(const RunConfig& c, const ModelParams& mp)
{
    return c.initial.value_or(PopulationState{equilibrium_density(mp.b1, mp.d1, mp.K), 0.0});
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems))
    , m_problems(std::move(problems))
{
}

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------------------------
// RunConfig

std::vector<std::string> RunConfig::violations() const
{
    std::vector<std::string> out = model.violations();
    auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!positive(horizon)) out.push_back("grid.T must be > 0");
    if (dt && !(positive(*dt) && *dt <= horizon)) out.push_back("grid.dt must lie in (0, T]");
    if (!positive(budget)) out.push_back("constraints.C must be > 0");
    if (!positive(max_flux)) out.push_back("constraints.M must be > 0");
    if (eps_list.empty()) out.push_back("eps_list must not be empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!positive(eps_list[i])) {
            out.push_back("eps_list[" + std::to_string(i) + "] must be > 0");
        }
        else if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
            out.push_back("eps_list must be strictly decreasing (entry " + std::to_string(i) + ")");
        }
    }
    if (budget_list.empty()) out.push_back("C_list must not be empty");
    for (std::size_t i = 0; i < budget_list.size(); ++i) {
        const double c = budget_list[i];
        if (!(positive(c) && c < horizon * max_flux)) {
            out.push_back("C_list[" + std::to_string(i) + "] must lie in (0, T M)");
        }
    }
    if (initial) {
        const auto& s = *initial;
        if (!(std::isfinite(s.n1) && std::isfinite(s.n2) && s.n1 >= 0.0 && s.n2 >= 0.0 && s.n1 + s.n2 > 0.0)) {
            out.push_back("initial must be non-negative with n1 + n2 > 0");
        }
    }
    if (kappa && !(positive(*kappa) && *kappa < 0.5 * max_flux)) out.push_back("kappa must lie in (0, M/2)");
    if (random_inits < 0) out.push_back("optimizer.random_inits must be >= 0");
    if (!positive(tol)) out.push_back("optimizer.tol must be > 0");
    if (max_iter < 1) out.push_back("optimizer.max_iter must be >= 1");
    if (!positive(cell_timeout_s)) out.push_back("sweep.cell_timeout_s must be > 0");
    if (jobs < 1) out.push_back("sweep.jobs must be >= 1");
    if (control == ControlSource::file && control_file.empty()) {
        out.push_back("simulate.control_file is required when simulate.control is \"file\"");
    }
    if (out_dir.empty()) out.push_back("out must not be empty");
    return out;
}

void RunConfig::validate() const
{
    auto v = violations();
    if (!v.empty()) {
        throw ConfigError(std::move(v));
    }
}

double RunConfig::step_for(double eps) const
{
    return dt.value_or(std::min(0.0015, std::max(0.0004, 0.5 * eps)));
}

TimeGrid RunConfig::grid_for(double eps) const
{
    return TimeGrid::with_step(horizon, step_for(eps));
}

AdmissibleSet RunConfig::admissible_set(double eps, double budget_value) const
{
    return AdmissibleSet{budget_value, max_flux, grid_for(eps)};
}

RunConfig parse_config(const std::string& json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    }
    catch (const json::parse_error& e) {
        throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }

    RunConfig c;
    std::vector<std::string> problems;
    Reader r(problems);
    if (!r.object(root, "config",
                  {"model", "grid", "constraints", "eps_list", "C_list", "initial", "kappa", "seed", "optimizer",
                   "sweep", "simulate", "out"})) {
        throw ConfigError(problems);
    }
    if (root.contains("model") && r.object(root["model"], "model", {"b1_0", "b2_0", "d1", "d2", "s_h", "K", "eps"})) {
        const auto& m = root["model"];
        r.number(m, "b1_0", "model", c.model.b1_0);
        r.number(m, "b2_0", "model", c.model.b2_0);
        r.number(m, "d1", "model", c.model.d1);
        r.number(m, "d2", "model", c.model.d2);
        r.number(m, "s_h", "model", c.model.s_h);
        r.number(m, "K", "model", c.model.K);
        r.number(m, "eps", "model", c.model.eps);
    }
    if (root.contains("grid") && r.object(root["grid"], "grid", {"T", "dt"})) {
        r.number(root["grid"], "T", "grid", c.horizon);
        r.optional_number(root["grid"], "dt", "grid", c.dt);
    }
    if (root.contains("constraints") && r.object(root["constraints"], "constraints", {"C", "M"})) {
        r.number(root["constraints"], "C", "constraints", c.budget);
        r.number(root["constraints"], "M", "constraints", c.max_flux);
    }
    r.number_list(root, "eps_list", "config", c.eps_list);
    r.number_list(root, "C_list", "config", c.budget_list);
    if (root.contains("initial") && !root["initial"].is_null() && r.object(root["initial"], "initial", {"n1", "n2"})) {
        PopulationState s{nan_value, nan_value};
        r.number(root["initial"], "n1", "initial", s.n1);
        r.number(root["initial"], "n2", "initial", s.n2);
        c.initial = s;
    }
    r.optional_number(root, "kappa", "config", c.kappa);
    r.integer(root, "seed", "config", c.seed);
    if (root.contains("optimizer") &&
        r.object(root["optimizer"], "optimizer", {"tol", "max_iter", "random_inits"})) {
        r.number(root["optimizer"], "tol", "optimizer", c.tol);
        r.integer(root["optimizer"], "max_iter", "optimizer", c.max_iter);
        r.integer(root["optimizer"], "random_inits", "optimizer", c.random_inits);
    }
    if (root.contains("sweep") && r.object(root["sweep"], "sweep", {"cell_timeout_s", "jobs"})) {
        r.number(root["sweep"], "cell_timeout_s", "sweep", c.cell_timeout_s);
        r.integer(root["sweep"], "jobs", "sweep", c.jobs);
    }
    if (root.contains("simulate") &&
        r.object(root["simulate"], "simulate", {"system", "control", "control_file"})) {
        std::string system = system_name(c.system), control = control_name(c.control);
        r.string(root["simulate"], "system", "simulate", system);
        r.string(root["simulate"], "control", "simulate", control);
        r.string(root["simulate"], "control_file", "simulate", c.control_file);
        if (system == "full") c.system = SystemKind::full;
        else if (system == "slowfast") c.system = SystemKind::slowfast;
        else if (system == "reduced") c.system = SystemKind::reduced;
        else problems.push_back("simulate.system must be one of full, slowfast, reduced");
        if (control == "zero") c.control = ControlSource::zero;
        else if (control == "file") c.control = ControlSource::file;
        else if (control == "analytic") c.control = ControlSource::analytic;
        else problems.push_back("simulate.control must be one of zero, file, analytic");
    }
    r.string(root, "out", "config", c.out_dir);

    for (auto& v : c.violations()) {
        problems.push_back(std::move(v));
    }
    if (!problems.empty()) {
        throw ConfigError(std::move(problems));
    }
    return c;
}

RunConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"cannot read config file " + path.string()});
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& c)
{
    json j;
    j["model"] = {{"b1_0", c.model.b1_0}, {"b2_0", c.model.b2_0}, {"d1", c.model.d1}, {"d2", c.model.d2},
                  {"s_h", c.model.s_h},   {"K", c.model.K},       {"eps", c.model.eps}};
    j["grid"]        = {{"T", c.horizon}, {"dt", c.dt ? json(*c.dt) : json(nullptr)}};
    j["constraints"] = {{"C", c.budget}, {"M", c.max_flux}};
    j["eps_list"]    = c.eps_list;
    j["C_list"]      = c.budget_list;
    j["initial"]     = c.initial ? json{{"n1", c.initial->n1}, {"n2", c.initial->n2}} : json(nullptr);
    j["kappa"]       = c.kappa ? json(*c.kappa) : json(nullptr);
    j["seed"]        = c.seed;
    j["optimizer"]   = {{"tol", c.tol}, {"max_iter", c.max_iter}, {"random_inits", c.random_inits}};
    j["sweep"]       = {{"cell_timeout_s", c.cell_timeout_s}, {"jobs", c.jobs}};
    j["simulate"]    = {{"system", system_name(c.system)}, {"control", control_name(c.control)},
                        {"control_file", c.control_file}};
    j["out"]         = c.out_dir;
    return dump(j);
}

// ---------------------------------------------------------------------------------------------
// commands

std::string cmd_steady_states(const RunConfig& config)
{
    const ModelParams mp = config.model.to_model_params();
    const auto report    = classify_stability(mp);
    std::string csv      = "name,n1,n2,eig1_re,eig1_im,eig2_re,eig2_im,stability\n";
    std::ostringstream summary;
    for (const auto& e : report.entries) {
        csv += e.name + ',' + format_double(e.state.n1) + ',' + format_double(e.state.n2);
        for (const auto& ev : e.eigenvalues) {
            csv += ',' + format_double(ev.real()) + ',' + format_double(ev.imag());
        }
        csv += ',' + to_string(e.label) + '\n';
        summary << e.name << " (" << format_double(e.state.n1) << ", " << format_double(e.state.n2) << ") "
                << to_string(e.label) << '\n';
    }
    const auto states = steady_states(mp);
    std::string conditions = "condition,holds\n";
    conditions += std::string("viability,") + (check_viability(mp) ? "true" : "false") + '\n';
    conditions += std::string("coexistence,") + (check_coexistence(mp) ? "true" : "false") + '\n';
    conditions += std::string("wild_only_present,") + (states.wild_only ? "true" : "false") + '\n';
    conditions += std::string("infected_only_present,") + (states.infected_only ? "true" : "false") + '\n';
    conditions += std::string("coexistence_present,") + (states.coexistence ? "true" : "false") + '\n';

    const fs::path out(config.out_dir);
    write_file(out / "steady_states.csv", csv);
    write_file(out / "conditions.csv", conditions);
    embed_config(config);
    if (!states.coexistence) {
        summary << "coexistence state absent\n";
    }
    return summary.str();
}

std::string cmd_simulate(const RunConfig& config)
{
    const double eps = config.model.eps;
    const TimeGrid grid = config.grid_for(eps);
    ControlSignal control = ControlSignal::zero(grid);
    switch (config.control) {
    case ControlSource::zero:
        break;
    case ControlSource::file:
        control = read_control_file(config.control_file, grid);
        if (!control.is_feasible(config.max_flux, config.budget)) {
            throw ConfigError({"control file " + config.control_file + " violates 0 <= u <= M or the budget C"});
        }
        break;
    case ControlSource::analytic:
        control = solve_reduced_analytic(config.budget, config.max_flux, ReducedModel(config.model), grid).control;
        break;
    }

    const fs::path out(config.out_dir);
    json summary{{"system", system_name(config.system)}, {"control", control_name(config.control)},
                 {"eps", eps},
                 {"dt", grid.dt()},
                 {"steps", grid.num_steps()},
                 {"budget_used", control.budget()}};
    const ModelParams mp = config.model.to_model_params();
    if (config.system == SystemKind::reduced) {
        const ReducedModel model(config.model);
        const auto traj = simulate_reduced(model, control);
        write_file(out / "trajectory.csv", trajectory_csv(traj));
        summary["final_state"] = {{"p", traj.final_state()[0]}};
        summary["cost"]        = J0(control, model);
    }
    else if (config.system == SystemKind::slowfast) {
        std::optional<SlowFastState> start;
        if (config.initial) {
            start = to_slowfast(*config.initial, eps, config.model.K);
        }
        const auto traj = simulate_slowfast(config.model, control, start);
        const auto pop  = from_slowfast(SlowFastState::from(traj.final_state()), eps, config.model.K);
        write_file(out / "trajectory.csv", trajectory_csv(traj));
        summary["final_state"] = {{"n", traj.final_state()[0]}, {"p", traj.final_state()[1]},
                                  {"n1", pop.n1},               {"n2", pop.n2}};
        summary["cost"]        = objective_J(pop, mp);
    }
    else {
        const auto traj = simulate_full(mp, control, full_initial(config, mp));
        const auto end  = PopulationState::from(traj.final_state());
        write_file(out / "trajectory.csv", trajectory_csv(traj));
        summary["final_state"] = {{"n1", end.n1}, {"n2", end.n2}};
        summary["cost"]        = objective_J(end, mp);
    }
    write_control(out / "control.csv", control, config.max_flux, config.budget);
    write_file(out / "summary.json", dump(summary));
    embed_config(config);
    return dump(summary);
}

std::string cmd_solve_reduced(const RunConfig& config)
{
    const ReducedModel model(config.model);
    const TimeGrid grid = config.grid_for(config.model.eps);
    const auto sol      = solve_reduced_analytic(config.budget, config.max_flux, model, grid);
    const auto traj     = simulate_reduced(model, sol.control);
    const auto sw       = switching_analysis(sol.control, model, config.max_flux, config.kappa_value());
    const auto& k       = model.constants();

    std::ostringstream report;
    report << "case " << to_string(sol.case_label) << '\n'
           << "C " << format_double(config.budget) << '\n'
           << "M " << format_double(config.max_flux) << '\n'
           << "T " << format_double(config.horizon) << '\n'
           << "C_star " << (sol.c_star ? format_double(*sol.c_star) : "none") << '\n'
           << "theta " << format_double(k.theta) << '\n'
           << "p_star " << format_double(k.p_star) << '\n'
           << "xi " << format_double(k.xi) << '\n'
           << "max_neg_f_over_g " << format_double(k.max_neg_fg) << '\n'
           << "release_start " << format_double(sol.start) << '\n'
           << "release_end " << format_double(sol.end) << '\n'
           << "release_level " << format_double(sol.level) << '\n'
           << "predicted_cost " << format_double(sol.predicted_cost) << '\n'
           << "discrete_cost " << format_double(J0(sol.control, model)) << '\n'
           << "threshold_cost " << format_double(model.threshold_cost()) << '\n'
           << "cost_inequality_holds " << (sol.cost_check ? "yes" : "no") << '\n'
           << "budget_error " << format_double(sol.budget_error) << '\n'
           << "switching_violations " << sw.violation_count << '\n'
           << "lambda_estimate " << format_double(sw.lambda_estimate) << '\n';
    if (sol.lambda_range) {
        report << "shift_range " << format_double(sol.lambda_range->first) << ' '
               << format_double(sol.lambda_range->second) << '\n';
    }

    const fs::path out(config.out_dir);
    write_file(out / "report.txt", report.str());
    write_control(out / "control.csv", sol.control, config.max_flux, config.budget);
    write_file(out / "trajectory.csv", trajectory_csv(traj));
    write_file(out / "switching.csv", switching_csv(sol.control, sw));
    embed_config(config);
    return report.str();
}

std::string cmd_optimize_full(const RunConfig& config)
{
    const double eps         = config.model.eps;
    const AdmissibleSet set  = config.admissible_set(eps, config.budget);
    std::optional<ReducedModel> reduced;
    try {
        reduced.emplace(config.model);
    }
    catch (const NoCoexistence&) {
        // no analytic initial guess without a bistable threshold
    }
    OptimOptions opts;
    opts.tol      = config.tol;
    opts.max_iter = config.max_iter;
    opts.jobs     = config.jobs;
    const auto result =
        optimize(slowfast_oracle(config.model), set, opts, default_inits(set, reduced, config.seed, config.random_inits));
    const auto structure = structure_report(result.control, config.max_flux, config.kappa_value());
    const auto grad      = cost_gradient_slowfast(result.control, config.model).gradient;
    const auto sw        = switching_from_gradient(result.control, grad, config.max_flux, config.kappa_value());

    const fs::path out(config.out_dir);
    write_control(out / "control.csv", result.control, config.max_flux, config.budget);
    std::string history = "iter,cost,kkt\n";
    for (std::size_t i = 0; i < result.cost_history.size(); ++i) {
        history += std::to_string(i) + ',' + format_double(result.cost_history[i]) + ',' +
                   format_double(result.kkt_history[i]) + '\n';
    }
    write_file(out / "history.csv", history);
    write_file(out / "structure.txt", structure.to_text());
    write_file(out / "switching.csv", switching_csv(result.control, sw));
    std::string runs = "init,cost,kkt,iterations,status\n";
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const auto& r = result.runs[i];
        runs += std::to_string(i) + ',' + format_double(r.cost) + ',' + format_double(r.kkt) + ',' +
                std::to_string(r.iterations) + ',' + r.status + '\n';
    }
    write_file(out / "runs.csv", runs);

    json summary{{"eps", eps},
                 {"C", config.budget},
                 {"cost", result.cost},
                 {"kkt_residual", result.kkt_residual},
                 {"iterations", result.n_iterations},
                 {"converged", result.converged},
                 {"status", result.runs[result.best_init].status},
                 {"best_init", result.best_init},
                 {"budget_used", structure.budget_used},
                 {"anchored", structure.on_segments_anchored()},
                 {"switching_violations", sw.violation_count}};
    if (reduced) {
        const auto sol        = solve_reduced_analytic(config.budget, config.max_flux, *reduced, set.grid);
        summary["J_ustar"]    = J_eps(sol.control, config.model);
        summary["u_err_L1"]   = l1_distance(result.control, sol.control);
        summary["analytic_case"] = to_string(sol.case_label);
    }
    write_file(out / "summary.json", dump(summary));
    embed_config(config);
    return dump(summary) + structure.to_text();
}

SweepCell run_eps_cell(const RunConfig& config, double eps, int inner_jobs)
{
    using clock      = std::chrono::steady_clock;
    const auto start = clock::now();
    SweepCell cell;
    cell.eps = eps;
    try {
        const SlowFastParams params = config.model.with_eps(eps);
        const AdmissibleSet set     = config.admissible_set(eps, config.budget);
        const ReducedModel reduced(config.model);
        const auto analytic = solve_reduced_analytic(config.budget, config.max_flux, reduced, set.grid);

        OptimOptions opts;
        opts.tol      = config.tol;
        opts.max_iter = config.max_iter;
        opts.jobs     = inner_jobs;
        opts.deadline = start + std::chrono::duration_cast<clock::duration>(
                                    std::chrono::duration<double>(config.cell_timeout_s));
        const auto result =
            optimize(slowfast_oracle(params), set, opts, default_inits(set, reduced, config.seed, config.random_inits));

        cell.J_hat   = result.cost;
        cell.J_ustar = J_eps(analytic.control, params);
        cell.rel_gap = (cell.J_ustar - cell.J_hat) / cell.J_hat;
        const auto p_hat  = simulate_slowfast(params, result.control);
        const auto p_zero = simulate_reduced(reduced, analytic.control);
        for (std::size_t k = 0; k < p_hat.states.size(); ++k) {
            cell.p_err_sup = std::max(cell.p_err_sup, std::abs(p_hat.states[k][1] - p_zero.states[k][0]));
        }
        cell.u_err_l1   = l1_distance(result.control, analytic.control);
        cell.iterations = result.n_iterations;
        cell.kkt        = result.kkt_residual;
        const bool timed_out = std::any_of(result.runs.begin(), result.runs.end(),
                                           [](const RunRecord& r) { return r.status == "deadline"; });
        cell.status  = timed_out ? "timed-out" : result.runs[result.best_init].status;
        cell.control = result.control;
    }
    catch (const std::exception& e) {
        cell.J_hat = cell.J_ustar = cell.rel_gap = cell.p_err_sup = cell.u_err_l1 = nan_value;
        cell.kkt    = nan_value;
        cell.status = std::string("error: ") + e.what();
    }
    cell.runtime_s = std::chrono::duration<double>(clock::now() - start).count();
    return cell;
}

std::vector<SweepCell> sweep_eps(const RunConfig& config)
{
    const std::size_t n = config.eps_list.size();
    std::vector<SweepCell> cells(n);
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), n);
    const int inner           = std::max(1, config.jobs / static_cast<int>(n));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            cells[i] = run_eps_cell(config, config.eps_list[i], inner);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }
    return cells;
}

std::string cmd_sweep_eps(const RunConfig& config)
{
    const auto cells = sweep_eps(config);
    std::string csv    = "eps,J_hat,J_ustar,rel_gap,p_err_sup,u_err_L1,runtime_s\n";
    std::string status = "eps,status,iterations,kkt\n";
    const fs::path out(config.out_dir);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        csv += format_double(c.eps) + ',' + format_double(c.J_hat) + ',' + format_double(c.J_ustar) + ',' +
               format_double(c.rel_gap) + ',' + format_double(c.p_err_sup) + ',' + format_double(c.u_err_l1) + ',' +
               format_double(c.runtime_s) + '\n';
        std::string msg = c.status;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        status += format_double(c.eps) + ',' + msg + ',' + std::to_string(c.iterations) + ',' + format_double(c.kkt) + '\n';
        if (c.control) {
            write_control(out / "controls" / ("cell_" + std::to_string(i) + ".csv"), *c.control, config.max_flux,
                          config.budget);
        }
    }
    write_file(out / "sweep_eps.csv", csv);
    write_file(out / "sweep_eps_status.csv", status);
    embed_config(config);
    return csv;
}

BudgetSweep sweep_budget(const RunConfig& config)
{
    const ReducedModel model(config.model);
    const TimeGrid grid = config.grid_for(config.model.eps);
    const double theta  = model.theta();
    auto evaluate = [&](double c) {
        const auto sol = solve_reduced_analytic(c, config.max_flux, model, grid);
        BudgetCell cell;
        cell.budget     = c;
        cell.case_label = to_string(sol.case_label);
        cell.J0_value   = J0(sol.control, model);
        cell.p_final    = simulate_reduced(model, sol.control).final_state()[0];
        cell.success    = cell.p_final > theta;
        return cell;
    };

    BudgetSweep sweep;
    sweep.c_star         = C_star(config.max_flux, model);
    sweep.threshold_cost = model.threshold_cost();
    for (double c : config.budget_list) {
        sweep.cells.push_back(evaluate(c));
    }

    std::optional<double> fail, succ;
    for (const auto& cell : sweep.cells) {
        if (cell.success && (!succ || cell.budget < *succ)) {
            succ = cell.budget;
        }
    }
    for (const auto& cell : sweep.cells) {
        if (!cell.success && (!succ || cell.budget < *succ) && (!fail || cell.budget > *fail)) {
            fail = cell.budget;
        }
    }
    if (fail && succ) {
        double lo = *fail, hi = *succ;
        while (hi - lo > 1e-6 * std::max(1.0, hi)) {
            const double mid = 0.5 * (lo + hi);
            (evaluate(mid).success ? hi : lo) = mid;
        }
        sweep.bracket = std::make_pair(lo, hi);
    }
    return sweep;
}

std::string cmd_sweep_c(const RunConfig& config)
{
    const auto sweep = sweep_budget(config);
    std::string csv  = "C,case,J0,success,p_T\n";
    for (const auto& c : sweep.cells) {
        csv += format_double(c.budget) + ',' + c.case_label + ',' + format_double(c.J0_value) + ',' +
               (c.success ? "true" : "false") + ',' + format_double(c.p_final) + '\n';
    }
    std::ostringstream summary;
    summary << "C_star " << format_double(sweep.c_star) << '\n'
            << "threshold_cost " << format_double(sweep.threshold_cost) << '\n';
    if (sweep.bracket) {
        summary << "bracket " << format_double(sweep.bracket->first) << ' ' << format_double(sweep.bracket->second)
                << '\n';
    }
    else {
        summary << "bracket none\n";
    }
    const fs::path out(config.out_dir);
    write_file(out / "sweep_c.csv", csv);
    write_file(out / "transition.txt", summary.str());
    embed_config(config);
    return csv + summary.str();
}

// ---------------------------------------------------------------------------------------------
// check

std::vector<CheckLine> cmd_check(const RunConfig& config)
{
    std::vector<CheckLine> lines;
    auto record = [&](std::string name, bool ok, std::string detail) {
        lines.push_back({std::move(name), ok, std::move(detail)});
    };
    auto guarded = [&](const std::string& name, auto&& body) {
        try {
            body();
        }
        catch (const std::exception& e) {
            record(name, false, std::string("exception: ") + e.what());
        }
    };
    const ModelParams mp = config.model.to_model_params();
    std::mt19937_64 rng(config.seed);

    guarded("steady-state residuals", [&] {
        double worst = 0.0;
        for (const auto& e : classify_stability(mp).entries) {
            worst = std::max(worst, rhs_full(e.state, 0.0, mp).lpNorm<Eigen::Infinity>());
        }
        record("steady-state residuals", worst < 1e-12, "max residual " + format_double(worst));
    });

    guarded("stability labels", [&] {
        bool ok = true;
        for (const auto& e : classify_stability(mp).entries) {
            if (e.name != "extinction") {
                ok = ok && classify_eigenvalues(eigenvalues_2x2(jacobian(e.state, mp))) == e.label;
            }
        }
        record("stability labels", ok, "labels agree with the Jacobian spectrum");
    });

    const TimeGrid grid = config.grid_for(config.model.eps);
    const AdmissibleSet set{config.budget, config.max_flux, grid};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_control = [&] {
        std::vector<double> raw(grid.num_steps());
        const double scale = 2.0 * config.max_flux * unit(rng);
        for (auto& v : raw) {
            v = scale * unit(rng) * unit(rng);
        }
        return project(raw, set);
    };

    guarded("projection", [&] {
        bool ok = true;
        for (int i = 0; i < 10; ++i) {
            const auto u = random_control();
            const auto again = project(u.values, set);
            double moved     = 0.0;
            for (std::size_t k = 0; k < u.values.size(); ++k) {
                moved = std::max(moved, std::abs(again.values[k] - u.values[k]));
            }
            ok = ok && u.is_feasible(config.max_flux, config.budget) && moved < 1e-12;
        }
        record("projection", ok, "feasible and idempotent on 10 random signals");
    });

    guarded("frequency confinement", [&] {
        double lo = 0.0, hi = 0.0;
        for (int i = 0; i < 5; ++i) {
            const auto traj = simulate_slowfast(config.model, random_control());
            for (const auto& s : traj.states) {
                lo = std::min(lo, s[1]);
                hi = std::max(hi, s[1]);
            }
        }
        record("frequency confinement", lo >= 0.0 && hi <= 1.0 + 1e-10,
               "p range [" + format_double(lo) + ", " + format_double(hi) + "]");
    });

    guarded("gradient consistency", [&] {
        double worst = 0.0;
        for (int i = 0; i < 2; ++i) {
            const auto u = random_control();
            std::vector<double> dir(u.values.size());
            for (auto& d : dir) {
                d = unit(rng) - 0.5;
            }
            const auto cg = cost_gradient_slowfast(u, config.model);
            auto shifted  = [&](double s) {
                auto v = u.values;
                for (std::size_t k = 0; k < v.size(); ++k) {
                    v[k] += s * dir[k];
                }
                return J_eps(ControlSignal(grid, v), config.model);
            };
            const double fd = (shifted(1e-6) - shifted(-1e-6)) / 2e-6;
            const double an = cg.gradient.dot(dir);
            worst           = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
        }
        record("gradient consistency", worst < 1e-4, "max relative gap " + format_double(worst));
    });

    guarded("threshold budget", [&] {
        const ReducedModel model(config.model);
        const double cs  = C_star(config.max_flux, model);
        const auto below = solve_reduced_analytic(0.9 * cs, config.max_flux, model, grid);
        const auto above = solve_reduced_analytic(std::min(1.1 * cs, 0.99 * config.horizon * config.max_flux),
                                                  config.max_flux, model, grid);
        record("threshold budget", below.cost_check && above.cost_check, "C_star " + format_double(cs));
    });
    return lines;
}

} // namespace wolbachia
