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
#include "wolbachia/slowfast.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wolbachia
{

namespace
{

constexpr double collapse_margin = 1e-12;

double death_mix(double p, const SlowFastParams& m)
{
    return m.d1 * (1.0 - p) + m.d2 * p;
}

double a_prime(double p, const SlowFastParams& m)
{
    return -m.b1_0 * (1.0 + m.s_h) + 2.0 * m.b1_0 * m.s_h * p + m.b2_0;
}

/// Minimizes `fn` on [lo, hi] by golden-section search.
template <class F>
double golden_section_min(F&& fn, double lo, double hi, int iterations = 80)
{
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
    double f1 = fn(x1), f2 = fn(x2);
    for (int i = 0; i < iterations; ++i) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = fn(x1);
        }
        else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = fn(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

/// Smaller root in n of a(p)(1 - eps n)(Z(p) - n) - M/K, written without the 1/eps cancellation
/// so that eps = 0 yields the limit Z(p) - M/(K a(p)).
double lower_root(double p, double eps, double max_flux, const SlowFastParams& m)
{
    const double a = a_of_p(p, m), z = Z_of_p(p, m);
    const double q = max_flux / (m.K * a);
    const double radicand = (1.0 - eps * z) * (1.0 - eps * z) + 4.0 * eps * q;
    return 2.0 * (z - q) / (1.0 + eps * z + std::sqrt(radicand));
}

} // namespace

std::vector<std::string> SlowFastParams::violations() const
{
    std::vector<std::string> out;
    auto positive = [](double x) {
        return std::isfinite(x) && x > 0.0;
    };
    if (!positive(b1_0)) out.push_back("b1_0 must be > 0");
    if (!positive(b2_0)) out.push_back("b2_0 must be > 0");
    if (!positive(d1)) out.push_back("d1 must be > 0");
    if (!positive(d2)) out.push_back("d2 must be > 0");
    if (!positive(K)) out.push_back("K must be > 0");
    if (!positive(eps)) out.push_back("eps must be > 0");
    if (!(std::isfinite(s_h) && s_h >= 0.0 && s_h <= 1.0)) out.push_back("s_h must lie in [0, 1]");
    return out;
}

void SlowFastParams::validate() const
{
    const auto v = violations();
    if (!v.empty()) {
        std::ostringstream msg;
        msg << "invalid slow-fast parameters:";
        for (const auto& s : v) {
            msg << ' ' << s << ';';
        }
        throw std::invalid_argument(msg.str());
    }
}

ModelParams SlowFastParams::to_model_params() const
{
    return ModelParams{b1_0 / eps, b2_0 / eps, d1, d2, s_h, K};
}

double a_of_p(double p, const SlowFastParams& m)
{
    return m.b1_0 * (1.0 - p) * (1.0 - m.s_h * p) + m.b2_0 * p;
}

double Z_of_p(double p, const SlowFastParams& m)
{
    return death_mix(p, m) / a_of_p(p, m);
}

Vec<2> SlowFastSystem::rhs(double, const Vec<2>& x, double u) const
{
    const auto& m   = params;
    const double n  = x[0], p = x[1];
    const double sc = 1.0 - m.eps * n;
    const double growth = m.b2_0 - m.b1_0 * (1.0 - m.s_h * p);
    return {(sc * (death_mix(p, m) - a_of_p(p, m) * n) - u / m.K) / m.eps,
            p * (1.0 - p) * (n * growth + m.d1 - m.d2) + u * (1.0 - p) / (m.K * sc)};
}

Mat<2> SlowFastSystem::jacobian(double, const Vec<2>& x, double u) const
{
    const auto& m   = params;
    const double n  = x[0], p = x[1];
    const double sc = 1.0 - m.eps * n;
    const double a  = a_of_p(p, m);
    const double growth = m.b2_0 - m.b1_0 * (1.0 - m.s_h * p);
    Mat<2> jac;
    jac(0, 0) = (-m.eps * (death_mix(p, m) - a * n) - a * sc) / m.eps;
    jac(0, 1) = sc * ((m.d2 - m.d1) - a_prime(p, m) * n) / m.eps;
    jac(1, 0) = p * (1.0 - p) * growth + u * (1.0 - p) * m.eps / (m.K * sc * sc);
    jac(1, 1) = (1.0 - 2.0 * p) * (n * growth + m.d1 - m.d2) + p * (1.0 - p) * n * m.b1_0 * m.s_h - u / (m.K * sc);
    return jac;
}

Vec<2> SlowFastSystem::control_gain(double, const Vec<2>& x, double) const
{
    const auto& m = params;
    return {-1.0 / (m.eps * m.K), (1.0 - x[1]) / (m.K * (1.0 - m.eps * x[0]))};
}

Vec<2> rhs_slowfast(const SlowFastState& state, double u, const SlowFastParams& params)
{
    if (1.0 - params.eps * state.n <= collapse_margin) {
        throw PopulationCollapse("rhs_slowfast: total population vanished (1 - eps n <= 1e-12)");
    }
    return SlowFastSystem{params}.rhs(0.0, state.vec(), u);
}

SlowFastState to_slowfast(const PopulationState& state, double eps, double K)
{
    const double total = state.n1 + state.n2;
    if (!(total > 0.0)) {
        throw std::invalid_argument("to_slowfast: total population must be positive");
    }
    return {(1.0 - total / K) / eps, state.n2 / total};
}

PopulationState from_slowfast(const SlowFastState& state, double eps, double K)
{
    const double scale = 1.0 - eps * state.n;
    if (scale < 0.0) {
        throw std::invalid_argument("from_slowfast: 1 - eps n must be non-negative");
    }
    const double total = K * scale;
    return {(1.0 - state.p) * total, state.p * total};
}

SlowFastState slowfast_initial_state(const SlowFastParams& params)
{
    return {params.d1 / params.b1_0, 0.0};
}

UniformBounds bounds(const SlowFastParams& params, double max_flux)
{
    params.validate();
    if (!(max_flux >= 0.0)) {
        throw std::invalid_argument("bounds: M must be non-negative");
    }
    auto neg_z = [&](double p) {
        return -Z_of_p(p, params);
    };

    constexpr int p_samples   = 2001;
    constexpr int eps_samples = 201;
    const double dp           = 1.0 / (p_samples - 1);

    int best_z = 0;
    for (int i = 1; i < p_samples; ++i) {
        if (Z_of_p(i * dp, params) > Z_of_p(best_z * dp, params)) {
            best_z = i;
        }
    }
    const double p_zmax =
        golden_section_min(neg_z, std::max(0.0, (best_z - 1) * dp), std::min(1.0, (best_z + 1) * dp));
    const double max_z = std::max({Z_of_p(p_zmax, params), Z_of_p(0.0, params), Z_of_p(1.0, params)});

    UniformBounds out;
    out.eps0 = 0.99 * std::min(params.b1_0 / params.d1, 1.0 / max_z);
    if (params.eps > out.eps0) {
        throw std::invalid_argument("bounds: eps exceeds the validity threshold eps0 = " + std::to_string(out.eps0));
    }
    const double initial = params.d1 / params.b1_0;
    out.n_plus           = std::max(initial, max_z);

    const double de = out.eps0 / (eps_samples - 1);
    double best = lower_root(0.0, 0.0, max_flux, params), best_p = 0.0, best_e = 0.0;
    for (int j = 0; j < eps_samples; ++j) {
        for (int i = 0; i < p_samples; ++i) {
            const double v = lower_root(i * dp, j * de, max_flux, params);
            if (v < best) {
                best   = v;
                best_p = i * dp;
                best_e = j * de;
            }
        }
    }
    // alternate 1D refinements inside the neighbouring sample cells
    double p_lo = std::max(0.0, best_p - dp), p_hi = std::min(1.0, best_p + dp);
    double e_lo = std::max(0.0, best_e - de), e_hi = std::min(out.eps0, best_e + de);
    for (int round = 0; round < 3; ++round) {
        best_p = golden_section_min([&](double p) { return lower_root(p, best_e, max_flux, params); }, p_lo, p_hi);
        best_e = golden_section_min([&](double e) { return lower_root(best_p, e, max_flux, params); }, e_lo, e_hi);
    }
    const double corners = std::min({lower_root(p_lo, e_lo, max_flux, params), lower_root(p_hi, e_hi, max_flux, params),
                                     lower_root(p_lo, e_hi, max_flux, params), lower_root(p_hi, e_lo, max_flux, params)});
    best        = std::min({best, lower_root(best_p, best_e, max_flux, params), corners});
    out.n_minus = std::min(initial, best);
    return out;
}

Trajectory<2> simulate_slowfast(const SlowFastParams& params, const ControlSignal& control,
                                std::optional<SlowFastState> initial, bool keep_stages)
{
    params.validate();
    const SlowFastState x0 = initial.value_or(slowfast_initial_state(params));
    auto traj              = integrate(SlowFastSystem{params}, x0.vec(), control, NewtonOptions{}, keep_stages);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        if (1.0 - params.eps * traj.states[k][0] <= collapse_margin) {
            throw PopulationCollapse("simulate_slowfast: total population vanished at node " + std::to_string(k));
        }
    }
    return traj;
}

std::vector<PopulationState> to_populations(const Trajectory<2>& traj, const SlowFastParams& params)
{
    std::vector<PopulationState> out;
    out.reserve(traj.states.size());
    for (const auto& x : traj.states) {
        out.push_back(from_slowfast(SlowFastState::from(x), params.eps, params.K));
    }
    return out;
}

double J_eps(const ControlSignal& control, const SlowFastParams& params)
{
    const auto traj = simulate_slowfast(params, control);
    return objective_J(from_slowfast(SlowFastState::from(traj.final_state()), params.eps, params.K),
                       params.to_model_params());
}

} // namespace wolbachia
