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
#ifndef WOLBACHIA_REDUCED_HPP
#define WOLBACHIA_REDUCED_HPP

#include "wolbachia/slowfast.hpp"

#include <optional>
#include <string>
#include <utility>

namespace wolbachia
{

/// Bistable frequency drift: f(0) = f(theta) = f(1) = 0, negative below theta, positive above.
double f_of_p(double p, const SlowFastParams& params);
/// Release efficiency: positive on [0, 1), zero at p = 1.
double g_of_p(double p, const SlowFastParams& params);
double f_prime(double p, const SlowFastParams& params);
double g_prime(double p, const SlowFastParams& params);

/// xi = d1 b2^0 / (d2 b1^0)
double xi_ratio(const SlowFastParams& params);

/// Unique interior critical point of f/g, (1 - sqrt(xi)) / s_h. Absent when xi >= 1 or s_h = 0.
std::optional<double> singular_frequency(const SlowFastParams& params);

struct DerivedConstants {
    double theta      = 0.0; ///< unstable frequency threshold, f(theta) = 0
    double xi         = 0.0;
    double p_star     = 0.0;
    double max_neg_fg = 0.0; ///< max of -f/g on [0, theta], attained at p_star
};

/// Throws NoCoexistence unless 1 - s_h < xi < 1.
DerivedConstants derived_constants(const SlowFastParams& params);

/// The scalar limit model p' = f(p) + u g(p), p(0) = 0 (eps is ignored).
class ReducedModel
{
public:
    /// Throws NoCoexistence when the bistable threshold does not exist.
    explicit ReducedModel(const SlowFastParams& params);

    const SlowFastParams& params() const
    {
        return m_params;
    }
    const DerivedConstants& constants() const
    {
        return m_constants;
    }
    double theta() const
    {
        return m_constants.theta;
    }

    double f(double p) const
    {
        return f_of_p(p, m_params);
    }
    double g(double p) const
    {
        return g_of_p(p, m_params);
    }

    /// (1 - theta)^2 K^2, the cost separating replacement success from failure.
    double threshold_cost() const;

private:
    SlowFastParams m_params;
    DerivedConstants m_constants;
};

struct ReducedSystem {
    static constexpr int dim = 1;
    SlowFastParams params;

    Vec<1> rhs(double, const Vec<1>& x, double u) const
    {
        return Vec<1>(f_of_p(x[0], params) + u * g_of_p(x[0], params));
    }
    Mat<1> jacobian(double, const Vec<1>& x, double u) const
    {
        return Mat<1>(f_prime(x[0], params) + u * g_prime(x[0], params));
    }
    Vec<1> control_gain(double, const Vec<1>& x, double) const
    {
        return Vec<1>(g_of_p(x[0], params));
    }
};

Trajectory<1> simulate_reduced(const ReducedModel& model, const ControlSignal& control, double p0 = 0.0,
                               bool keep_stages = false);

/// K^2 (1 - p(T))^2 with p integrated from 0 under `control`.
double J0(const ControlSignal& control, const ReducedModel& model);

/// Time for u = M to carry the frequency from 0 to p: integral of 1/(f + M g).
/// Requires M > max(-f/g) and 0 <= p < 1. Absolute quadrature tolerance 1e-10.
double G_M(double p, double max_flux, const ReducedModel& model);

/// Budget a saturated release needs to reach theta: M * G_M(theta). Throws InsufficientFlux
/// when M <= max(-f/g). Absolute quadrature tolerance 1e-8.
double C_star(double max_flux, const ReducedModel& model);

enum class ReleaseCase
{
    late_release,
    early_release,
    continuum
};

std::string to_string(ReleaseCase c);

struct AnalyticSolution {
    ReleaseCase case_label = ReleaseCase::late_release;
    double start = 0.0; ///< the release is level on [start, end]
    double end   = 0.0;
    double level = 0.0;
    ControlSignal control; ///< cell averages of the release on the requested grid
    double predicted_cost = 0.0;
    std::optional<double> c_star;                     ///< absent when the flux is insufficient
    std::optional<std::pair<double, double>> lambda_range; ///< valid shifts in the continuum case
    double budget_error = 0.0;  ///< |dt sum(u) - C| after discretization
    bool cost_check     = true; ///< predicted_cost on the expected side of threshold_cost()
};

/**
 * Optimal release for the reduced problem: a single saturated block of length C/M,
 * placed at the end of the horizon when the budget cannot cross the threshold and at the
 * start when it can. |C - C*| <= 1e-8 is treated as the tie, where every shift is optimal
 * (the block at lambda = 0 is returned). Throws HorizonTooShort if T <= C/M.
 */
AnalyticSolution solve_reduced_analytic(double budget, double max_flux, const ReducedModel& model,
                                        const TimeGrid& grid);

} // namespace wolbachia

#endif // WOLBACHIA_REDUCED_HPP
