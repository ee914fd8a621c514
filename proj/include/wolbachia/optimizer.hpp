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
#ifndef WOLBACHIA_OPTIMIZER_HPP
#define WOLBACHIA_OPTIMIZER_HPP

#include "wolbachia/adjoint.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wolbachia
{

/// Discretized admissible controls: 0 <= u_k <= M and dt * sum(u_k) <= C on a grid over [0, T].
struct AdmissibleSet {
    double budget   = 0.75; ///< C
    double max_flux = 10.0; ///< M
    TimeGrid grid{10.0, 6667};

    double horizon() const
    {
        return grid.horizon();
    }
    std::vector<std::string> violations() const;
    void validate() const;
};

/// Euclidean projection onto the admissible set. The budget multiplier is found by bisection
/// and then solved exactly on the identified active set.
ControlSignal project(const std::vector<double>& raw, const AdmissibleSet& set);

/// dt * sum |u1_k - u2_k|. Throws std::invalid_argument on a grid mismatch.
double l1_distance(const ControlSignal& u1, const ControlSignal& u2);

/// Inclusive runs [first, last] of 0-based cell indices.
using Segment = std::pair<std::size_t, std::size_t>;

struct StructureReport {
    double kappa = 0.0;
    std::vector<Segment> on_segments;    ///< u >= M - kappa
    std::vector<Segment> relax_segments; ///< kappa <= u <= M - kappa
    double budget_used = 0.0;
    std::size_t num_cells = 0;

    /// Every saturated run touches the first or the last cell.
    bool on_segments_anchored() const;
    std::size_t relax_cells() const;
    std::string to_text() const;
};

/// Requires 0 < kappa < M/2.
StructureReport structure_report(const ControlSignal& control, double max_flux, double kappa);

/// Cost and exact gradient of a discretized problem.
using Oracle = std::function<CostGradient(const ControlSignal&)>;

Oracle reduced_oracle(const ReducedModel& model);
Oracle slowfast_oracle(const SlowFastParams& params);

struct OptimOptions {
    double tol          = 1e-8; ///< on || u - P(u - grad/dt) ||_inf
    int max_iter        = 5000;
    double armijo_slope = 1e-4;
    double backtrack    = 0.5;
    int max_backtracks  = 60;
    /// Barzilai-Borwein trial steps after the first iteration (the first trial step is always 1).
    bool bb_steps       = true;
    /// Initializations are distributed over this many threads; results do not depend on it.
    int jobs            = 1;
    /// Cooperative wall-clock limit; iterations stop once it has passed.
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct RunRecord {
    double cost        = 0.0;
    double kkt         = 0.0;
    int iterations     = 0;
    bool converged     = false;
    std::string status; ///< "converged", "max_iter", "stalled", "deadline" or an error message
};

struct OptimResult {
    ControlSignal control{TimeGrid{1.0, 1}, {0.0}};
    double cost = 0.0;
    std::vector<double> cost_history; ///< accepted iterates of the best run, starting at its init
    std::vector<double> kkt_history;
    double kkt_residual = 0.0;
    int n_iterations    = 0;
    bool converged      = false;
    std::size_t best_init = 0;
    std::vector<RunRecord> runs; ///< one per init, in input order
    StructureReport structure;
};

/**
 * Projected gradient descent with Armijo backtracking from each init; the lowest final cost wins
 * (ties go to the earlier init). Throws NumericalError only if every run failed.
 */
OptimResult optimize(const Oracle& oracle, const AdmissibleSet& set, const OptimOptions& opts,
                     const std::vector<ControlSignal>& inits);

/**
 * zero, uniform C/T, all-M projected, the analytic reduced optimum (when it exists) and
 * `num_random` projected uniform random signals drawn from a fixed seed.
 */
std::vector<ControlSignal> default_inits(const AdmissibleSet& set, const std::optional<ReducedModel>& model,
                                         std::uint64_t seed = 20260101, int num_random = 4);

} // namespace wolbachia

#endif // WOLBACHIA_OPTIMIZER_HPP
