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
#ifndef WOLBACHIA_HARNESS_HPP
#define WOLBACHIA_HARNESS_HPP

#include "wolbachia/adjoint.hpp"
#include "wolbachia/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wolbachia
{

/// Raised for unreadable, malformed or invalid configurations. Maps to exit code 1.
class ConfigError : public std::runtime_error
{
public:
    explicit ConfigError(std::vector<std::string> problems);

    const std::vector<std::string>& problems() const
    {
        return m_problems;
    }

private:
    std::vector<std::string> m_problems;
};

enum class SystemKind
{
    full,
    slowfast,
    reduced
};

enum class ControlSource
{
    zero,
    file,
    analytic
};

struct RunConfig {
    SlowFastParams model; ///< eps here is the single-run value
    double horizon = 10.0;
    std::optional<double> dt; ///< default: min(0.0015, max(0.0004, eps / 2))
    double budget   = 0.75;
    double max_flux = 10.0;
    std::vector<double> eps_list{1.0, 0.5, 0.1, 0.05, 0.01, 0.005, 0.002, 0.001, 0.0005};
    std::vector<double> budget_list{0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75};
    std::optional<PopulationState> initial; ///< full-system start; default the wild equilibrium
    std::optional<double> kappa;            ///< default 1e-3 M
    std::uint64_t seed   = 20260101;
    int random_inits     = 4;
    double tol           = 1e-8;
    int max_iter         = 5000;
    double cell_timeout_s = 120.0;
    int jobs             = 1;
    SystemKind system    = SystemKind::full;
    ControlSource control = ControlSource::analytic;
    std::string control_file;
    std::string out_dir = "out";

    std::vector<std::string> violations() const;
    /// Throws ConfigError listing every violation.
    void validate() const;

    double step_for(double eps) const;
    TimeGrid grid_for(double eps) const;
    AdmissibleSet admissible_set(double eps, double budget_value) const;
    double kappa_value() const
    {
        return kappa.value_or(1e-3 * max_flux);
    }
};

/// Missing keys take the defaults above; unknown keys are reported as violations.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

/// 17 significant digits.
std::string format_double(double v);

struct SweepCell {
    double eps = 0.0;
    double J_hat = 0.0;
    double J_ustar = 0.0;
    double rel_gap = 0.0;
    double p_err_sup = 0.0;
    double u_err_l1 = 0.0;
    double runtime_s = 0.0;
    std::string status; ///< optimizer status of the best run, "timed-out", or an error message
    int iterations = 0;
    double kkt = 0.0;
    std::optional<ControlSignal> control;
};

/// One cell of the eps sweep: optimize the full problem, then compare with the analytic reduced optimum.
SweepCell run_eps_cell(const RunConfig& config, double eps, int inner_jobs = 1);

/// Cells in input order; failures are recorded in the status column, never dropped.
std::vector<SweepCell> sweep_eps(const RunConfig& config);

struct BudgetCell {
    double budget = 0.0;
    std::string case_label;
    double J0_value = 0.0;
    bool success = false;
    double p_final = 0.0;
};

struct BudgetSweep {
    std::vector<BudgetCell> cells;
    std::optional<std::pair<double, double>> bracket; ///< (last failure, first success) after bisection
    double c_star = 0.0;
    double threshold_cost = 0.0;
};

BudgetSweep sweep_budget(const RunConfig& config);

/// Each writes its files plus config.json into config.out_dir and returns a short summary.
std::string cmd_steady_states(const RunConfig& config);
std::string cmd_simulate(const RunConfig& config);
std::string cmd_solve_reduced(const RunConfig& config);
std::string cmd_optimize_full(const RunConfig& config);
std::string cmd_sweep_eps(const RunConfig& config);
std::string cmd_sweep_c(const RunConfig& config);

struct CheckLine {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// A quick invariant suite over the configured parameters.
std::vector<CheckLine> cmd_check(const RunConfig& config);

} // namespace wolbachia

#endif // WOLBACHIA_HARNESS_HPP
