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
#ifndef WOLBACHIA_SLOWFAST_HPP
#define WOLBACHIA_SLOWFAST_HPP

#include "wolbachia/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wolbachia
{

/**
 * Birth rates scaled as b_i = b_i^0 / eps. Small eps means fast reproduction; the total
 * population then relaxes on an O(eps) time scale while the infected frequency moves slowly.
 * Defaults are the reference profile used throughout the experiments.
 */
struct SlowFastParams {
    double b1_0 = 1.0;
    double b2_0 = 0.9;
    double d1   = 0.27;
    double d2   = 0.3;
    double s_h  = 0.9;
    double K    = 1.0;
    double eps  = 1.0;

    std::vector<std::string> violations() const;
    void validate() const;

    ModelParams to_model_params() const;
    SlowFastParams with_eps(double e) const
    {
        SlowFastParams copy = *this;
        copy.eps            = e;
        return copy;
    }
};

/// n = (1 - N/K)/eps is the scaled deficit of the total population N, p = n2/N the infected frequency.
struct SlowFastState {
    double n = 0.0;
    double p = 0.0;

    Vec<2> vec() const
    {
        return {n, p};
    }
    static SlowFastState from(const Vec<2>& v)
    {
        return {v[0], v[1]};
    }
};

struct UniformBounds {
    double n_minus = 0.0;
    double n_plus  = 0.0;
    double eps0    = 0.0;
};

/// a(p) = b1^0 (1-p)(1 - s_h p) + b2^0 p
double a_of_p(double p, const SlowFastParams& params);
/// Z(p) = (d1 (1-p) + d2 p) / a(p), the quasi-steady deficit at frequency p
double Z_of_p(double p, const SlowFastParams& params);

/// (dn/dt, dp/dt). Throws PopulationCollapse if 1 - eps n <= 1e-12.
Vec<2> rhs_slowfast(const SlowFastState& state, double u, const SlowFastParams& params);

/// Rejects N = n1 + n2 = 0.
SlowFastState to_slowfast(const PopulationState& state, double eps, double K);
/// Rejects 1 - eps n < 0.
PopulationState from_slowfast(const SlowFastState& state, double eps, double K);

/// Starting point (d1/b1^0, 0), i.e. the wild equilibrium.
SlowFastState slowfast_initial_state(const SlowFastParams& params);

/**
 * A-priori bounds n_- <= n(t) <= n_+ valid for every control with 0 <= u <= M when eps <= eps0.
 * eps0 = 0.99 min(b1^0/d1, 1/max Z). The inner extrema are located on a 2001 x 201 (p, eps)
 * sample and refined by golden-section search. Throws std::invalid_argument if params.eps > eps0.
 */
UniformBounds bounds(const SlowFastParams& params, double max_flux);

struct SlowFastSystem {
    static constexpr int dim = 2;
    SlowFastParams params;

    Vec<2> rhs(double, const Vec<2>& x, double u) const;
    Mat<2> jacobian(double, const Vec<2>& x, double u) const;
    Vec<2> control_gain(double, const Vec<2>& x, double u) const;
};

/// Integrates the (n, p) system from `initial` (default: the wild equilibrium).
/// Throws PopulationCollapse if a node leaves 1 - eps n > 1e-12.
Trajectory<2> simulate_slowfast(const SlowFastParams& params, const ControlSignal& control,
                                std::optional<SlowFastState> initial = std::nullopt, bool keep_stages = false);

/// Maps a slow-fast trajectory node by node to (n1, n2).
std::vector<PopulationState> to_populations(const Trajectory<2>& traj, const SlowFastParams& params);

/// J evaluated at the final state of the slow-fast integration, with n2* = K(1 - eps d2/b2^0).
double J_eps(const ControlSignal& control, const SlowFastParams& params);

} // namespace wolbachia

#endif // WOLBACHIA_SLOWFAST_HPP
