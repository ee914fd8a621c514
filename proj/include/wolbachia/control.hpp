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
#ifndef WOLBACHIA_CONTROL_HPP
#define WOLBACHIA_CONTROL_HPP

#include <cstddef>
#include <vector>

namespace wolbachia
{

/// Uniform grid of N_d steps on [0, T].
class TimeGrid
{
public:
    TimeGrid(double horizon, std::size_t num_steps);

    /// Grid whose step is the closest to `dt` that divides T exactly.
    static TimeGrid with_step(double horizon, double dt);

    double horizon() const
    {
        return m_horizon;
    }
    std::size_t num_steps() const
    {
        return m_num_steps;
    }
    double dt() const
    {
        return m_horizon / static_cast<double>(m_num_steps);
    }
    /// Time of node k, k in [0, N_d]; node N_d is exactly T.
    double node(std::size_t k) const
    {
        return m_horizon * static_cast<double>(k) / static_cast<double>(m_num_steps);
    }

    bool operator==(const TimeGrid& other) const = default;

private:
    double m_horizon;
    std::size_t m_num_steps;
};

/// Piecewise-constant release rate; values[k] is active on [t_k, t_{k+1}).
struct ControlSignal {
    TimeGrid grid;
    std::vector<double> values;

    ControlSignal(TimeGrid g, std::vector<double> v);

    static ControlSignal zero(const TimeGrid& grid);
    static ControlSignal constant(const TimeGrid& grid, double level);

    /// Cell averages of level * 1_[start, end]. Switch times that fall inside a cell
    /// leave one partial cell, so the integral is exactly level * (end - start).
    static ControlSignal block(const TimeGrid& grid, double start, double end, double level);

    /// dt * sum(values)
    double budget() const;
    double max_value() const;
    double min_value() const;

    /// Box 0 <= u <= M and budget dt*sum(u) <= C, each with absolute slack.
    bool is_feasible(double max_flux, double max_budget, double slack = 1e-9) const;
};

} // namespace wolbachia

#endif // WOLBACHIA_CONTROL_HPP
