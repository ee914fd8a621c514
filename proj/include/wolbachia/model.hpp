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
#ifndef WOLBACHIA_MODEL_HPP
#define WOLBACHIA_MODEL_HPP

#include "wolbachia/integrator.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace wolbachia
{

/// Wild (1) and Wolbachia-infected (2) populations competing for one carrying capacity.
struct ModelParams {
    // defaults: the wMel-like reference profile with unit birth-rate scaling
    double b1  = 1.0;  ///< wild birth rate
    double b2  = 0.9;  ///< infected birth rate
    double d1  = 0.27; ///< wild death rate
    double d2  = 0.3;  ///< infected death rate
    double s_h = 0.9;  ///< cytoplasmic incompatibility level in [0, 1]
    double K   = 1.0;  ///< carrying capacity

    /// Empty when all invariants hold, otherwise one message per violated condition.
    std::vector<std::string> violations() const;
    /// Throws std::invalid_argument listing every violation.
    void validate() const;
};

struct PopulationState {
    double n1 = 0.0;
    double n2 = 0.0;

    Vec<2> vec() const
    {
        return {n1, n2};
    }
    static PopulationState from(const Vec<2>& v)
    {
        return {v[0], v[1]};
    }
};

struct SteadyStates {
    PopulationState extinction{0.0, 0.0};
    std::optional<PopulationState> wild_only;     ///< (n1*, 0), present iff b1 > d1
    std::optional<PopulationState> infected_only; ///< (0, n2*), present iff b2 > d2
    std::optional<PopulationState> coexistence;   ///< present iff the coexistence condition holds
};

enum class Stability
{
    stable,
    unstable,
    marginal
};

std::string to_string(Stability s);

struct StabilityEntry {
    std::string name;
    PopulationState state;
    std::array<std::complex<double>, 2> eigenvalues;
    Stability label;
};

struct StabilityReport {
    std::vector<StabilityEntry> entries;

    /// Entry by name ("extinction", "wild_only", "infected_only", "coexistence"); nullptr if absent.
    const StabilityEntry* find(const std::string& name) const;
};

/// Competition kernels without input validation, for integrator hot loops.
namespace kernel
{
/// Cytoplasmic incompatibility factor n2/(n1+n2), taken as 0 at total extinction.
inline double infected_fraction(double n1, double n2)
{
    const double total = n1 + n2;
    return total == 0.0 ? 0.0 : n2 / total;
}

inline Vec<2> competition(const ModelParams& m, double n1, double n2)
{
    const double crowding = 1.0 - (n1 + n2) / m.K;
    const double p        = infected_fraction(n1, n2);
    return {m.b1 * n1 * (1.0 - m.s_h * p) * crowding - m.d1 * n1, m.b2 * n2 * crowding - m.d2 * n2};
}

Mat<2> competition_jacobian(const ModelParams& m, double n1, double n2);
} // namespace kernel

/// (f1(n), f2(n) + u). Throws std::invalid_argument on non-finite or negative input.
Vec<2> rhs_full(const PopulationState& state, double u, const ModelParams& params);

/// Both populations sustain themselves alone: b1 > d1 and b2 > d2.
bool check_viability(const ModelParams& params);

/// 1 - s_h < (d1 b2) / (d2 b1) < 1
bool check_coexistence(const ModelParams& params);

/// n_i* = K (1 - d_i / b_i)
double equilibrium_density(double birth, double death, double capacity);

SteadyStates steady_states(const ModelParams& params);

/// Jacobian of the uncontrolled field, written with N = (n1+n2)/K and p = n2/(n1+n2).
/// Rejects the extinction state where the field is not differentiable.
Mat<2> jacobian(const PopulationState& state, const ModelParams& params);

/// Closed-form eigenvalues of a 2x2 matrix.
std::array<std::complex<double>, 2> eigenvalues_2x2(const Mat<2>& m);

/// stable iff max real part < -1e-9, unstable iff > 1e-9, marginal otherwise.
Stability classify_eigenvalues(const std::array<std::complex<double>, 2>& ev);

/**
 * Labels every steady state. The origin uses the growth rates along the axes
 * (directional derivatives b1 - d1 and b2 - d2) since the Jacobian does not exist there.
 */
StabilityReport classify_stability(const ModelParams& params);

/// 1/2 n1(T)^2 + 1/2 [(n2* - n2(T))_+]^2
double objective_J(const PopulationState& final_state, const ModelParams& params);

/// Gradient of objective_J with respect to (n1(T), n2(T)); the kink at n2 = n2* uses 0.
Vec<2> objective_J_gradient(const PopulationState& final_state, const ModelParams& params);

/// The controlled two-population system in the form the integrator expects.
struct FullSystem {
    static constexpr int dim = 2;
    ModelParams params;

    Vec<2> rhs(double, const Vec<2>& x, double u) const
    {
        Vec<2> f = kernel::competition(params, x[0], x[1]);
        f[1] += u;
        return f;
    }
    Mat<2> jacobian(double, const Vec<2>& x, double) const
    {
        return kernel::competition_jacobian(params, x[0], x[1]);
    }
    Vec<2> control_gain(double, const Vec<2>&, double) const
    {
        return {0.0, 1.0};
    }
};

/// Integrates the full system; the default initial state is the wild equilibrium (n1*, 0).
Trajectory<2> simulate_full(const ModelParams& params, const ControlSignal& control,
                            std::optional<PopulationState> initial = std::nullopt, bool keep_stages = false);

} // namespace wolbachia

#endif // WOLBACHIA_MODEL_HPP
