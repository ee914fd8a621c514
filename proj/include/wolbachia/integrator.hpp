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
#ifndef WOLBACHIA_INTEGRATOR_HPP
#define WOLBACHIA_INTEGRATOR_HPP

#include "wolbachia/control.hpp"
#include "wolbachia/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace wolbachia
{

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

/**
 * A controlled ODE x' = F(t, x, u) with a scalar control.
 * Systems expose `static constexpr int dim` and `rhs(t, x, u)`. They may additionally expose
 * `jacobian(t, x, u)` (dF/dx) and `control_gain(t, x, u)` (dF/du); otherwise both are
 * approximated by central differences.
 */
template <class S>
concept ControlledSystem = requires(const S& s, double t, const Vec<S::dim>& x, double u) {
    { s.rhs(t, x, u) } -> std::convertible_to<Vec<S::dim>>;
};

template <class S>
concept HasJacobian = ControlledSystem<S> && requires(const S& s, double t, const Vec<S::dim>& x, double u) {
    { s.jacobian(t, x, u) } -> std::convertible_to<Mat<S::dim>>;
};

template <class S>
concept HasControlGain = ControlledSystem<S> && requires(const S& s, double t, const Vec<S::dim>& x, double u) {
    { s.control_gain(t, x, u) } -> std::convertible_to<Vec<S::dim>>;
};

struct NewtonOptions {
    double tol   = 1e-12; ///< infinity norm of the stacked stage residual
    int max_iter = 50;
};

template <int Dim>
struct Trajectory {
    TimeGrid grid;
    std::vector<Vec<Dim>> states; ///< N_d + 1 nodes
    /// First Lobatto stage of every step (the second stage is the next node). Empty unless requested.
    std::vector<Vec<Dim>> stage_states;
    double max_residual          = 0.0;
    std::size_t newton_iterations = 0;

    const Vec<Dim>& final_state() const
    {
        return states.back();
    }
};

/// dF/dx, analytic when the system provides it. Central differences with h = 1e-7 (1 + |x_j|) otherwise.
template <ControlledSystem S>
Mat<S::dim> state_jacobian(const S& sys, double t, const Vec<S::dim>& x, double u)
{
    if constexpr (HasJacobian<S>) {
        return sys.jacobian(t, x, u);
    }
    else {
        Mat<S::dim> jac;
        for (int j = 0; j < S::dim; ++j) {
            const double h = 1e-7 * (1.0 + std::abs(x[j]));
            Vec<S::dim> xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            jac.col(j) = (sys.rhs(t, xp, u) - sys.rhs(t, xm, u)) / (2.0 * h);
        }
        return jac;
    }
}

/// dF/du
template <ControlledSystem S>
Vec<S::dim> control_gain(const S& sys, double t, const Vec<S::dim>& x, double u)
{
    if constexpr (HasControlGain<S>) {
        return sys.control_gain(t, x, u);
    }
    else {
        const double h = 1e-7 * (1.0 + std::abs(u));
        return (sys.rhs(t, x, u + h) - sys.rhs(t, x, u - h)) / (2.0 * h);
    }
}

template <int Dim>
struct StepResult {
    Vec<Dim> next;
    Vec<Dim> first_stage;
    double residual = 0.0;
    int iterations  = 0;
};

namespace detail
{

template <int Dim>
using StackedVec = Eigen::Matrix<double, 2 * Dim, 1>;
template <int Dim>
using StackedMat = Eigen::Matrix<double, 2 * Dim, 2 * Dim>;

/// Derivative of the stacked stage residual with respect to (Y1, Y2) for the tableau
/// A = [[1/2, -1/2], [1/2, 1/2]].
template <int Dim>
StackedMat<Dim> stage_matrix(const Mat<Dim>& jac1, const Mat<Dim>& jac2, double dt)
{
    const Mat<Dim> id = Mat<Dim>::Identity();
    StackedMat<Dim> w;
    w.template topLeftCorner<Dim, Dim>()     = id - 0.5 * dt * jac1;
    w.template topRightCorner<Dim, Dim>()    = 0.5 * dt * jac2;
    w.template bottomLeftCorner<Dim, Dim>()  = -0.5 * dt * jac1;
    w.template bottomRightCorner<Dim, Dim>() = id - 0.5 * dt * jac2;
    return w;
}

} // namespace detail

/**
 * One step of the two-stage Lobatto IIIC method (c = [0, 1], A = [[1/2, -1/2], [1/2, 1/2]],
 * b = [1/2, 1/2]) with the control frozen at `u` over [t, t + dt].
 * The stage equations are solved by Newton's method; the method is stiffly accurate,
 * so the second stage is the next state.
 */
template <ControlledSystem S>
StepResult<S::dim> lobatto_iiic_step(const S& sys, const Vec<S::dim>& x, double u, double t, double dt,
                                     const NewtonOptions& opts = {}, std::size_t step_index = 0)
{
    constexpr int D = S::dim;
    Vec<D> y1 = x, y2 = x;
    const double t2 = t + dt;
    double residual = std::numeric_limits<double>::infinity();

    for (int iter = 0;; ++iter) {
        const Vec<D> f1 = sys.rhs(t, y1, u);
        const Vec<D> f2 = sys.rhs(t2, y2, u);
        detail::StackedVec<D> r;
        r.template head<D>() = y1 - x - 0.5 * dt * (f1 - f2);
        r.template tail<D>() = y2 - x - 0.5 * dt * (f1 + f2);
        residual = r.template lpNorm<Eigen::Infinity>();
        if (!std::isfinite(residual)) {
            throw NewtonDivergence(step_index, residual);
        }
        if (residual < opts.tol) {
            return {y2, y1, residual, iter};
        }
        if (iter >= opts.max_iter) {
            throw NewtonDivergence(step_index, residual);
        }
        const auto w = detail::stage_matrix<D>(state_jacobian(sys, t, y1, u), state_jacobian(sys, t2, y2, u), dt);
        const detail::StackedVec<D> delta = w.partialPivLu().solve(r);
        y1 -= delta.template head<D>();
        y2 -= delta.template tail<D>();
    }
}

/// N_d Lobatto IIIC steps from `initial`, control value k applied on step k.
template <ControlledSystem S>
Trajectory<S::dim> integrate(const S& sys, const Vec<S::dim>& initial, const ControlSignal& control,
                             const NewtonOptions& opts = {}, bool keep_stages = false)
{
    const TimeGrid& grid = control.grid;
    const std::size_t n  = grid.num_steps();
    const double dt      = grid.dt();

    Trajectory<S::dim> traj{grid, {}, {}, 0.0, 0};
    traj.states.reserve(n + 1);
    traj.states.push_back(initial);
    if (keep_stages) {
        traj.stage_states.reserve(n);
    }
    for (std::size_t k = 0; k < n; ++k) {
        auto step = lobatto_iiic_step(sys, traj.states.back(), control.values[k], grid.node(k), dt, opts, k);
        traj.max_residual = std::max(traj.max_residual, step.residual);
        traj.newton_iterations += static_cast<std::size_t>(step.iterations);
        if (keep_stages) {
            traj.stage_states.push_back(step.first_stage);
        }
        traj.states.push_back(step.next);
    }
    return traj;
}

/// Costates and control gradient of a terminal cost, exact for the discrete Lobatto IIIC map.
template <int Dim>
struct DiscreteSensitivity {
    std::vector<Vec<Dim>> costates; ///< dJ/dx_k at every node
    std::vector<double> gradient;   ///< dJ/du_k for every step
};

/**
 * Reverse sweep through the implicit stage equations. `traj` must have been produced by
 * `integrate(..., keep_stages = true)` with the same system and control, and `terminal`
 * is the gradient of the cost with respect to the final state.
 */
template <ControlledSystem S>
DiscreteSensitivity<S::dim> discrete_adjoint(const S& sys, const Trajectory<S::dim>& traj,
                                             const ControlSignal& control, const Vec<S::dim>& terminal)
{
    constexpr int D       = S::dim;
    const std::size_t n   = control.grid.num_steps();
    const double dt       = control.grid.dt();
    if (traj.stage_states.size() != n || traj.states.size() != n + 1) {
        throw std::invalid_argument("discrete_adjoint: trajectory lacks stage states for this grid");
    }

    DiscreteSensitivity<D> out;
    out.costates.assign(n + 1, Vec<D>::Zero());
    out.gradient.assign(n, 0.0);
    out.costates[n] = terminal;

    for (std::size_t k = n; k-- > 0;) {
        const double t1 = control.grid.node(k), t2 = t1 + dt, u = control.values[k];
        const Vec<D>& y1 = traj.stage_states[k];
        const Vec<D>& y2 = traj.states[k + 1];
        const auto w     = detail::stage_matrix<D>(state_jacobian(sys, t1, y1, u), state_jacobian(sys, t2, y2, u), dt);

        detail::StackedVec<D> rhs = detail::StackedVec<D>::Zero();
        rhs.template tail<D>()    = out.costates[k + 1];
        const detail::StackedVec<D> mu = w.transpose().partialPivLu().solve(rhs);

        const Vec<D> g1 = control_gain(sys, t1, y1, u);
        const Vec<D> g2 = control_gain(sys, t2, y2, u);
        out.costates[k] = mu.template head<D>() + mu.template tail<D>();
        out.gradient[k] = 0.5 * dt * (mu.template head<D>().dot(g1 - g2) + mu.template tail<D>().dot(g1 + g2));
    }
    return out;
}

struct OrderEstimate {
    double order = 0.0;
    std::vector<double> step_sizes;
    std::vector<double> errors; ///< infinity-norm error of the final state against the reference
};

/**
 * Empirical convergence order on [0, T]. The control is sampled at cell midpoints, which keeps
 * second order for smooth controls and is exact for controls switching on grid nodes.
 * The reference solution uses the finest step divided by four.
 */
template <ControlledSystem S>
OrderEstimate convergence_order(const S& sys, const Vec<S::dim>& initial, double horizon,
                                std::span<const double> steps, const std::function<double(double)>& control_of_time,
                                const NewtonOptions& opts = {})
{
    if (steps.size() < 3) {
        throw std::invalid_argument("convergence_order: need at least three step sizes");
    }
    auto final_state = [&](double dt) {
        const TimeGrid grid = TimeGrid::with_step(horizon, dt);
        std::vector<double> u(grid.num_steps());
        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] = control_of_time(grid.node(k) + 0.5 * grid.dt());
        }
        return std::pair{grid.dt(), integrate(sys, initial, ControlSignal(grid, std::move(u)), opts).final_state()};
    };

    double finest = steps[0];
    for (double dt : steps) {
        finest = std::min(finest, dt);
    }
    const Vec<S::dim> reference = final_state(finest / 4.0).second;

    OrderEstimate est;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double dt : steps) {
        auto [h, x]     = final_state(dt);
        const double e  = (x - reference).template lpNorm<Eigen::Infinity>();
        const double lx = std::log(h), ly = std::log(e);
        est.step_sizes.push_back(h);
        est.errors.push_back(e);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(steps.size());
    est.order      = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return est;
}

} // namespace wolbachia

#endif // WOLBACHIA_INTEGRATOR_HPP
