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
#include "wolbachia/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wolbachia
{

namespace
{
bool positive(double x)
{
    return std::isfinite(x) && x > 0.0;
}
} // namespace

std::vector<std::string> ModelParams::violations() const
{
    std::vector<std::string> out;
    if (!positive(b1)) out.push_back("b1 must be > 0");
    if (!positive(b2)) out.push_back("b2 must be > 0");
    if (!positive(d1)) out.push_back("d1 must be > 0");
    if (!positive(d2)) out.push_back("d2 must be > 0");
    if (!positive(K)) out.push_back("K must be > 0");
    if (!(std::isfinite(s_h) && s_h >= 0.0 && s_h <= 1.0)) out.push_back("s_h must lie in [0, 1]");
    return out;
}

void ModelParams::validate() const
{
    const auto v = violations();
    if (!v.empty()) {
        std::ostringstream msg;
        msg << "invalid model parameters:";
        for (const auto& s : v) {
            msg << ' ' << s << ';';
        }
        throw std::invalid_argument(msg.str());
    }
}

std::string to_string(Stability s)
{
    switch (s) {
    case Stability::stable:
        return "stable";
    case Stability::unstable:
        return "unstable";
    case Stability::marginal:
        return "marginal";
    }
    return "unknown";
}

const StabilityEntry* StabilityReport::find(const std::string& name) const
{
    auto it = std::find_if(entries.begin(), entries.end(), [&](const StabilityEntry& e) {
        return e.name == name;
    });
    return it == entries.end() ? nullptr : &*it;
}

Mat<2> kernel::competition_jacobian(const ModelParams& m, double n1, double n2)
{
    const double N  = (n1 + n2) / m.K;
    const double p  = infected_fraction(n1, n2);
    const double sh = m.s_h;
    Mat<2> jac;
    jac(0, 0) = m.b1 * ((1.0 - sh * p) * (1.0 - (2.0 - p) * N) + sh * p * (1.0 - p) * (1.0 - N)) - m.d1;
    jac(0, 1) = -m.b1 * (1.0 - p) * (sh * (1.0 - p) + N * (1.0 - sh));
    jac(1, 0) = -m.b2 * p * N;
    jac(1, 1) = m.b2 * (1.0 - (1.0 + p) * N) - m.d2;
    return jac;
}

Vec<2> rhs_full(const PopulationState& state, double u, const ModelParams& params)
{
    if (!std::isfinite(state.n1) || !std::isfinite(state.n2) || !std::isfinite(u)) {
        throw std::invalid_argument("rhs_full: non-finite input");
    }
    if (state.n1 < 0.0 || state.n2 < 0.0 || u < 0.0) {
        throw std::invalid_argument("rhs_full: densities and control must be non-negative");
    }
    Vec<2> f = kernel::competition(params, state.n1, state.n2);
    f[1] += u;
    return f;
}

bool check_viability(const ModelParams& params)
{
    return params.b1 > params.d1 && params.b2 > params.d2;
}

bool check_coexistence(const ModelParams& params)
{
    const double ratio = (params.d1 * params.b2) / (params.d2 * params.b1);
    return 1.0 - params.s_h < ratio && ratio < 1.0;
}

double equilibrium_density(double birth, double death, double capacity)
{
    return capacity * (1.0 - death / birth);
}

SteadyStates steady_states(const ModelParams& params)
{
    params.validate();
    SteadyStates out;
    if (params.b1 > params.d1) {
        out.wild_only = PopulationState{equilibrium_density(params.b1, params.d1, params.K), 0.0};
    }
    if (params.b2 > params.d2) {
        out.infected_only = PopulationState{0.0, equilibrium_density(params.b2, params.d2, params.K)};
    }
    if (check_viability(params) && check_coexistence(params)) {
        const double ratio    = (params.d1 * params.b2) / (params.d2 * params.b1);
        const double infected = (1.0 - ratio) / params.s_h;
        const double total    = equilibrium_density(params.b2, params.d2, params.K);
        out.coexistence       = PopulationState{(1.0 - infected) * total, infected * total};
    }
    return out;
}

Mat<2> jacobian(const PopulationState& state, const ModelParams& params)
{
    if (!(state.n1 + state.n2 > 0.0)) {
        throw std::invalid_argument("jacobian: the field is not differentiable at total extinction");
    }
    return kernel::competition_jacobian(params, state.n1, state.n2);
}

std::array<std::complex<double>, 2> eigenvalues_2x2(const Mat<2>& m)
{
    const double half_trace = 0.5 * (m(0, 0) + m(1, 1));
    const double det        = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const std::complex<double> root = std::sqrt(std::complex<double>(half_trace * half_trace - det, 0.0));
    return {half_trace + root, half_trace - root};
}

Stability classify_eigenvalues(const std::array<std::complex<double>, 2>& ev)
{
    const double max_real = std::max(ev[0].real(), ev[1].real());
    if (max_real < -1e-9) {
        return Stability::stable;
    }
    if (max_real > 1e-9) {
        return Stability::unstable;
    }
    return Stability::marginal;
}

StabilityReport classify_stability(const ModelParams& params)
{
    const SteadyStates states = steady_states(params);
    StabilityReport report;

    // growth rates along the axes out of the origin
    const std::array<std::complex<double>, 2> axes{std::complex<double>(params.b1 - params.d1, 0.0),
                                                   std::complex<double>(params.b2 - params.d2, 0.0)};
    report.entries.push_back({"extinction", states.extinction, axes, classify_eigenvalues(axes)});

    auto add = [&](const char* name, const std::optional<PopulationState>& s) {
        if (s) {
            const auto ev = eigenvalues_2x2(jacobian(*s, params));
            report.entries.push_back({name, *s, ev, classify_eigenvalues(ev)});
        }
    };
    add("wild_only", states.wild_only);
    add("infected_only", states.infected_only);
    add("coexistence", states.coexistence);
    return report;
}

double objective_J(const PopulationState& final_state, const ModelParams& params)
{
    const double target  = equilibrium_density(params.b2, params.d2, params.K);
    const double deficit = std::max(target - final_state.n2, 0.0);
    return 0.5 * final_state.n1 * final_state.n1 + 0.5 * deficit * deficit;
}

Vec<2> objective_J_gradient(const PopulationState& final_state, const ModelParams& params)
{
    const double target  = equilibrium_density(params.b2, params.d2, params.K);
    const double deficit = std::max(target - final_state.n2, 0.0);
    return {final_state.n1, -deficit};
}

Trajectory<2> simulate_full(const ModelParams& params, const ControlSignal& control,
                            std::optional<PopulationState> initial, bool keep_stages)
{
    params.validate();
    const PopulationState x0 =
        initial.value_or(PopulationState{equilibrium_density(params.b1, params.d1, params.K), 0.0});
    return integrate(FullSystem{params}, x0.vec(), control, NewtonOptions{}, keep_stages);
}

} // namespace wolbachia
