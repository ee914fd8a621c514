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
#include "wolbachia/reduced.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wolbachia
{

namespace
{

double survival_factor(double p, const SlowFastParams& m)
{
    return (1.0 - p) * (1.0 - m.s_h * p);
}

double survival_factor_prime(double p, const SlowFastParams& m)
{
    return -(1.0 - m.s_h * p) - m.s_h * (1.0 - p);
}

double a_prime(double p, const SlowFastParams& m)
{
    return m.b1_0 * survival_factor_prime(p, m) + m.b2_0;
}

double selection(double p, const SlowFastParams& m)
{
    return m.d1 * m.b2_0 - m.d2 * m.b1_0 * (1.0 - m.s_h * p);
}

/// Adaptive Gauss-Kronrod (7/15) on [lo, hi]; throws if the error estimate exceeds abs_tol.
template <class F>
double integrate_abs(F&& fn, double lo, double hi, double abs_tol)
{
    double error = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(fn, lo, hi, 15, 1e-12, &error);
    if (!(error <= abs_tol) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "quadrature did not reach tolerance (error estimate " << error << ")";
        throw NumericalError(msg.str());
    }
    return value;
}

} // namespace

double f_of_p(double p, const SlowFastParams& m)
{
    return p * (1.0 - p) * selection(p, m) / a_of_p(p, m);
}

double g_of_p(double p, const SlowFastParams& m)
{
    return m.b1_0 * survival_factor(p, m) / (m.K * a_of_p(p, m));
}

double f_prime(double p, const SlowFastParams& m)
{
    const double a    = a_of_p(p, m);
    const double h    = selection(p, m);
    const double num  = p * (1.0 - p) * h;
    const double dnum = (1.0 - 2.0 * p) * h + p * (1.0 - p) * m.d2 * m.b1_0 * m.s_h;
    return (dnum * a - num * a_prime(p, m)) / (a * a);
}

double g_prime(double p, const SlowFastParams& m)
{
    const double a = a_of_p(p, m);
    return m.b1_0 * (survival_factor_prime(p, m) * a - survival_factor(p, m) * a_prime(p, m)) / (m.K * a * a);
}

double xi_ratio(const SlowFastParams& m)
{
    return (m.d1 * m.b2_0) / (m.d2 * m.b1_0);
}

std::optional<double> singular_frequency(const SlowFastParams& m)
{
    const double xi = xi_ratio(m);
    if (xi >= 1.0 || m.s_h <= 0.0) {
        return std::nullopt;
    }
    return (1.0 - std::sqrt(xi)) / m.s_h;
}

DerivedConstants derived_constants(const SlowFastParams& params)
{
    params.validate();
    const double xi = xi_ratio(params);
    if (!(1.0 - params.s_h < xi && xi < 1.0)) {
        throw NoCoexistence("no bistable threshold: xi = " + std::to_string(xi) + " is outside (1 - s_h, 1)");
    }
    DerivedConstants c;
    c.xi         = xi;
    c.theta      = (1.0 - xi) / params.s_h;
    c.p_star     = *singular_frequency(params);
    c.max_neg_fg = -f_of_p(c.p_star, params) / g_of_p(c.p_star, params);
    return c;
}

ReducedModel::ReducedModel(const SlowFastParams& params)
    : m_params(params)
    , m_constants(derived_constants(params))
{
}

double ReducedModel::threshold_cost() const
{
    const double gap = (1.0 - theta()) * m_params.K;
    return gap * gap;
}

Trajectory<1> simulate_reduced(const ReducedModel& model, const ControlSignal& control, double p0, bool keep_stages)
{
    return integrate(ReducedSystem{model.params()}, Vec<1>(p0), control, NewtonOptions{}, keep_stages);
}

double J0(const ControlSignal& control, const ReducedModel& model)
{
    const double p_final = simulate_reduced(model, control).final_state()[0];
    const double K       = model.params().K;
    return K * K * (1.0 - p_final) * (1.0 - p_final);
}

double G_M(double p, double max_flux, const ReducedModel& model)
{
    if (!(p >= 0.0 && p < 1.0)) {
        throw std::invalid_argument("G_M: p must lie in [0, 1)");
    }
    if (!(max_flux > model.constants().max_neg_fg)) {
        throw InsufficientFlux("G_M: M must exceed max(-f/g) = " + std::to_string(model.constants().max_neg_fg));
    }
    if (!(model.f(p) + max_flux * model.g(p) > 0.0)) {
        throw std::invalid_argument("G_M: f + M g must be positive at p");
    }
    if (p == 0.0) {
        return 0.0;
    }
    return integrate_abs([&](double x) { return 1.0 / (model.f(x) + max_flux * model.g(x)); }, 0.0, p, 1e-10);
}

double C_star(double max_flux, const ReducedModel& model)
{
    if (!(max_flux > model.constants().max_neg_fg)) {
        throw InsufficientFlux("C_star: M = " + std::to_string(max_flux) + " does not exceed max(-f/g) = " +
                               std::to_string(model.constants().max_neg_fg));
    }
    return integrate_abs([&](double x) { return max_flux / (model.f(x) + max_flux * model.g(x)); }, 0.0,
                         model.theta(), 1e-8);
}

std::string to_string(ReleaseCase c)
{
    switch (c) {
    case ReleaseCase::late_release:
        return "late_release";
    case ReleaseCase::early_release:
        return "early_release";
    case ReleaseCase::continuum:
        return "continuum";
    }
    return "unknown";
}

AnalyticSolution solve_reduced_analytic(double budget, double max_flux, const ReducedModel& model,
                                        const TimeGrid& grid)
{
    if (!(budget > 0.0) || !(max_flux > 0.0)) {
        throw std::invalid_argument("solve_reduced_analytic: C and M must be positive");
    }
    const double horizon  = grid.horizon();
    const double duration = budget / max_flux;
    if (horizon <= duration) {
        throw HorizonTooShort("solve_reduced_analytic: T = " + std::to_string(horizon) +
                              " must exceed C/M = " + std::to_string(duration));
    }

    ReleaseCase label = ReleaseCase::late_release;
    std::optional<double> threshold;
    std::optional<std::pair<double, double>> shifts;
    if (max_flux > model.constants().max_neg_fg) {
        threshold = C_star(max_flux, model);
        if (std::abs(budget - *threshold) <= 1e-8) {
            label  = ReleaseCase::continuum;
            shifts = std::pair{0.0, horizon - duration};
        }
        else if (budget > *threshold) {
            label = ReleaseCase::early_release;
        }
    }

    const double start = (label == ReleaseCase::late_release) ? horizon - duration : 0.0;
    ControlSignal control = ControlSignal::block(grid, start, start + duration, max_flux);
    const double cost     = J0(control, model);
    const double reference = model.threshold_cost();

    bool check = true;
    switch (label) {
    case ReleaseCase::late_release:
        check = cost > reference;
        break;
    case ReleaseCase::early_release:
        check = cost < reference;
        break;
    case ReleaseCase::continuum:
        check = std::abs(cost - reference) < 1e-3;
        break;
    }
    const double budget_error = std::abs(control.budget() - budget);
    return AnalyticSolution{label, start, start + duration, max_flux, std::move(control), cost, threshold, shifts,
                            budget_error, check};
}

} // namespace wolbachia
