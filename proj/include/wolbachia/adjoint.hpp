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
#ifndef WOLBACHIA_ADJOINT_HPP
#define WOLBACHIA_ADJOINT_HPP

#include "wolbachia/reduced.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace wolbachia
{

template <int Dim>
struct AdjointTrajectory {
    TimeGrid grid;
    std::vector<Vec<Dim>> costates; ///< N_d + 1 nodes
};

/// Derivative of a cost with respect to the control value on each interval (cost units times time).
struct GradientSignal {
    TimeGrid grid{1.0, 1};
    std::vector<double> values;

    /// sum_k values[k] * direction[k]
    double dot(const std::vector<double>& direction) const;
};

/// Cost and its exact derivative for the discretized dynamics, as consumed by the optimizer.
struct CostGradient {
    double cost = 0.0;
    GradientSignal gradient;
};

/**
 * Backward solution of -q' = (f'(p) + u g'(p)) q, q(T) = -2 K^2 (1 - p(T)), with the
 * Lobatto IIIC scheme applied in the reversed time s = T - t.
 */
AdjointTrajectory<1> adjoint_reduced(const Trajectory<1>& p_traj, const ControlSignal& control,
                                     const ReducedModel& model);

/// values[k] = dt (w(t_k) + w(t_{k+1})) / 2 with w = q g(p). Never positive.
GradientSignal gradient_reduced(const ControlSignal& control, const ReducedModel& model);

/**
 * Backward solution of -q' = Jac(n1, n2)^T q for the (n1, n2) system with b_i = b_i^0 / eps.
 * The default terminal value is the gradient of the terminal cost, (n1(T), -(n2* - n2(T))_+).
 */
AdjointTrajectory<2> adjoint_full(const Trajectory<2>& traj, const ControlSignal& control,
                                  const SlowFastParams& params, std::optional<Vec<2>> terminal = std::nullopt);

/// values[k] = dt (q2(t_k) + q2(t_{k+1})) / 2 along the (n1, n2) trajectory from (n1*, 0).
GradientSignal gradient_full(const ControlSignal& control, const SlowFastParams& params);

struct SwitchingReport {
    TimeGrid grid{1.0, 1};
    std::vector<double> w; ///< per-cell switching function q g(p) of the discrete dynamics, N_d values
    double lambda_estimate     = 0.0;
    std::size_t violation_count = 0;
    double kappa               = 0.0;
    std::vector<std::size_t> on_set;       ///< u >= M - kappa
    std::vector<std::size_t> off_set;      ///< u <= kappa
    std::vector<std::size_t> interior_set; ///< everything else
    double singular_control = 0.0;         ///< -f(p*)/g(p*)
};

/**
 * First-order check of the reduced problem. w is the exact derivative of the discretized J0
 * divided by dt, so a control that is optimal on its grid satisfies the conditions to rounding.
 * Cells at M need w <= Lambda, cells at 0 need
 * w >= Lambda and interior cells need w = Lambda, each to 1e-6 |Lambda|.
 * Lambda is the median of w over interior cells when there are any, otherwise the midpoint
 * between the largest w at M and the smallest w at 0. kappa defaults to 1e-3 M.
 */
SwitchingReport switching_analysis(const ControlSignal& control, const ReducedModel& model, double max_flux,
                                   std::optional<double> kappa = std::nullopt);

/// The same classification driven by any per-cell cost gradient (for instance the full problem's).
/// singular_control is left at 0.
SwitchingReport switching_from_gradient(const ControlSignal& control, const GradientSignal& gradient, double max_flux,
                                        std::optional<double> kappa = std::nullopt);

/// J0 and its exact gradient for the discrete reduced dynamics.
CostGradient cost_gradient_reduced(const ControlSignal& control, const ReducedModel& model);

/// J_eps (slow-fast integration) and its exact gradient for the discrete slow-fast dynamics.
CostGradient cost_gradient_slowfast(const ControlSignal& control, const SlowFastParams& params);

/// J for the (n1, n2) integration and its exact discrete gradient.
CostGradient cost_gradient_full(const ControlSignal& control, const SlowFastParams& params);

} // namespace wolbachia

#endif // WOLBACHIA_ADJOINT_HPP
