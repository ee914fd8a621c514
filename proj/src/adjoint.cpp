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
#include "wolbachia/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wolbachia
{

namespace
{

/// Linear costate dynamics dq/ds = A(x(T - s), u)^T q in reversed time, driven by a stored forward trajectory.
template <int Dim, class Coefficient>
struct BackwardLinearSystem {
    static constexpr int dim = Dim;
    const std::vector<Vec<Dim>>* states;
    double dt;
    std::size_t num_steps;
    Coefficient coefficient;

    Mat<Dim> matrix(double s, double u) const
    {
        const auto j = static_cast<std::size_t>(std::lround(s / dt));
        return coefficient((*states)[num_steps - std::min(j, num_steps)], u);
    }
    Vec<Dim> rhs(double s, const Vec<Dim>& q, double u) const
    {
        return matrix(s, u) * q;
    }
    Mat<Dim> jacobian(double s, const Vec<Dim>&, double u) const
    {
        return matrix(s, u);
    }
};

template <int Dim, class Coefficient>
AdjointTrajectory<Dim> integrate_backward(const Trajectory<Dim>& traj, const ControlSignal& control,
                                          const Vec<Dim>& terminal, Coefficient coefficient)
{
    const TimeGrid& grid = control.grid;
    const std::size_t n  = grid.num_steps();
    if (traj.states.size() != n + 1 || !(traj.grid == grid)) {
        throw std::invalid_argument("adjoint: trajectory and control use different grids");
    }
    std::vector<double> reversed(control.values.rbegin(), control.values.rend());
    const BackwardLinearSystem<Dim, Coefficient> sys{&traj.states, grid.dt(), n, coefficient};
    auto back = integrate(sys, terminal, ControlSignal(grid, std::move(reversed)));
    std::reverse(back.states.begin(), back.states.end());
    return {grid, std::move(back.states)};
}

template <int Dim>
GradientSignal average_component(const AdjointTrajectory<Dim>& adj, auto&& weight)
{
    const std::size_t n = adj.grid.num_steps();
    const double dt     = adj.grid.dt();
    GradientSignal out{adj.grid, std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = 0.5 * dt * (weight(k) + weight(k + 1));
    }
    return out;
}

Vec<2> full_terminal(const Vec<2>& final_state, const ModelParams& m)
{
    return objective_J_gradient(PopulationState::from(final_state), m);
}

PopulationState full_initial(const ModelParams& m)
{
    return {equilibrium_density(m.b1, m.d1, m.K), 0.0};
}

} // namespace

double GradientSignal::dot(const std::vector<double>& direction) const
{
    if (direction.size() != values.size()) {
        throw std::invalid_argument("GradientSignal::dot: size mismatch");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        s += values[k] * direction[k];
    }
    return s;
}

AdjointTrajectory<1> adjoint_reduced(const Trajectory<1>& p_traj, const ControlSignal& control,
                                     const ReducedModel& model)
{
    const SlowFastParams m = model.params();
    const double p_final   = p_traj.final_state()[0];
    const Vec<1> terminal(-2.0 * m.K * m.K * (1.0 - p_final));
    return integrate_backward<1>(p_traj, control, terminal, [m](const Vec<1>& p, double u) {
        return Mat<1>(f_prime(p[0], m) + u * g_prime(p[0], m));
    });
}

GradientSignal gradient_reduced(const ControlSignal& control, const ReducedModel& model)
{
    const auto traj = simulate_reduced(model, control);
    const auto adj  = adjoint_reduced(traj, control, model);
    return average_component(adj, [&](std::size_t j) {
        return adj.costates[j][0] * model.g(traj.states[j][0]);
    });
}

AdjointTrajectory<2> adjoint_full(const Trajectory<2>& traj, const ControlSignal& control,
                                  const SlowFastParams& params, std::optional<Vec<2>> terminal)
{
    const ModelParams m = params.to_model_params();
    const Vec<2> q_end  = terminal.value_or(full_terminal(traj.final_state(), m));
    return integrate_backward<2>(traj, control, q_end, [m](const Vec<2>& x, double) -> Mat<2> {
        return kernel::competition_jacobian(m, x[0], x[1]).transpose();
    });
}

GradientSignal gradient_full(const ControlSignal& control, const SlowFastParams& params)
{
    const ModelParams m = params.to_model_params();
    const auto traj     = simulate_full(m, control);
    const auto adj      = adjoint_full(traj, control, params);
    return average_component(adj, [&](std::size_t j) {
        return adj.costates[j][1];
    });
}

SwitchingReport switching_from_gradient(const ControlSignal& control, const GradientSignal& grad, double max_flux,
                                        std::optional<double> kappa)
{
    if (!(max_flux > 0.0)) {
        throw std::invalid_argument("switching_analysis: M must be positive");
    }
    if (!(grad.grid == control.grid)) {
        throw std::invalid_argument("switching_analysis: gradient and control grids differ");
    }
    const double dt = control.grid.dt();

    SwitchingReport r;
    r.grid  = control.grid;
    r.kappa = kappa.value_or(1e-3 * max_flux);
    r.w.resize(grad.values.size());
    for (std::size_t k = 0; k < r.w.size(); ++k) {
        r.w[k] = grad.values[k] / dt;
        const double u = control.values[k];
        if (u >= max_flux - r.kappa) {
            r.on_set.push_back(k);
        }
        else if (u <= r.kappa) {
            r.off_set.push_back(k);
        }
        else {
            r.interior_set.push_back(k);
        }
    }

    auto extreme = [&](const std::vector<std::size_t>& set, bool largest) {
        double v = r.w[set.front()];
        for (auto k : set) {
            v = largest ? std::max(v, r.w[k]) : std::min(v, r.w[k]);
        }
        return v;
    };
    if (!r.interior_set.empty()) {
        std::vector<double> inner;
        for (auto k : r.interior_set) {
            inner.push_back(r.w[k]);
        }
        const auto mid = inner.begin() + static_cast<std::ptrdiff_t>(inner.size() / 2);
        std::nth_element(inner.begin(), mid, inner.end());
        r.lambda_estimate = *mid;
    }
    else if (!r.on_set.empty() && !r.off_set.empty()) {
        r.lambda_estimate = 0.5 * (extreme(r.on_set, true) + extreme(r.off_set, false));
    }
    else if (!r.on_set.empty()) {
        r.lambda_estimate = extreme(r.on_set, true);
    }
    else if (!r.off_set.empty()) {
        r.lambda_estimate = extreme(r.off_set, false);
    }

    const double lam = r.lambda_estimate;
    const double tol = 1e-6 * std::abs(lam);
    for (auto k : r.on_set) {
        r.violation_count += r.w[k] > lam + tol;
    }
    for (auto k : r.off_set) {
        r.violation_count += r.w[k] < lam - tol;
    }
    for (auto k : r.interior_set) {
        r.violation_count += std::abs(r.w[k] - lam) > tol;
    }
    return r;
}

SwitchingReport switching_analysis(const ControlSignal& control, const ReducedModel& model, double max_flux,
                                   std::optional<double> kappa)
{
    SwitchingReport r  = switching_from_gradient(control, cost_gradient_reduced(control, model).gradient, max_flux, kappa);
    const auto& c      = model.constants();
    r.singular_control = -model.f(c.p_star) / model.g(c.p_star);
    return r;
}

CostGradient cost_gradient_reduced(const ControlSignal& control, const ReducedModel& model)
{
    const ReducedSystem sys{model.params()};
    const auto traj      = integrate(sys, Vec<1>(0.0), control, NewtonOptions{}, true);
    const double K       = model.params().K;
    const double gap     = 1.0 - traj.final_state()[0];
    const auto sens      = discrete_adjoint(sys, traj, control, Vec<1>(-2.0 * K * K * gap));
    return {K * K * gap * gap, GradientSignal{control.grid, sens.gradient}};
}

CostGradient cost_gradient_slowfast(const ControlSignal& control, const SlowFastParams& params)
{
    const auto traj         = simulate_slowfast(params, control, std::nullopt, true);
    const ModelParams m     = params.to_model_params();
    const SlowFastState end = SlowFastState::from(traj.final_state());
    const PopulationState pop = from_slowfast(end, params.eps, params.K);
    const Vec<2> dj = objective_J_gradient(pop, m);

    // chain rule through n1 = K (1-p)(1 - eps n), n2 = K p (1 - eps n)
    const double scale = 1.0 - params.eps * end.n;
    const Vec<2> terminal{-params.eps * params.K * ((1.0 - end.p) * dj[0] + end.p * dj[1]),
                          params.K * scale * (dj[1] - dj[0])};
    const auto sens = discrete_adjoint(SlowFastSystem{params}, traj, control, terminal);
    return {objective_J(pop, m), GradientSignal{control.grid, sens.gradient}};
}

CostGradient cost_gradient_full(const ControlSignal& control, const SlowFastParams& params)
{
    const ModelParams m = params.to_model_params();
    const auto traj     = simulate_full(m, control, full_initial(m), true);
    const auto sens     = discrete_adjoint(FullSystem{m}, traj, control, full_terminal(traj.final_state(), m));
    return {objective_J(PopulationState::from(traj.final_state()), m), GradientSignal{control.grid, sens.gradient}};
}

} // namespace wolbachia
