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
#include "wolbachia/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wolbachia
{

TimeGrid::TimeGrid(double horizon, std::size_t num_steps)
    : m_horizon(horizon)
    , m_num_steps(num_steps)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
    }
    if (num_steps < 1) {
        throw std::invalid_argument("TimeGrid: at least one step is required");
    }
}

TimeGrid TimeGrid::with_step(double horizon, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("TimeGrid: dt must be positive and finite");
    }
    auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    return TimeGrid(horizon, std::max<std::size_t>(n, 1));
}

ControlSignal::ControlSignal(TimeGrid g, std::vector<double> v)
    : grid(g)
    , values(std::move(v))
{
    if (values.size() != grid.num_steps()) {
        throw std::invalid_argument("ControlSignal: expected " + std::to_string(grid.num_steps()) +
                                    " values, got " + std::to_string(values.size()));
    }
}

ControlSignal ControlSignal::zero(const TimeGrid& grid)
{
    return constant(grid, 0.0);
}

ControlSignal ControlSignal::constant(const TimeGrid& grid, double level)
{
    return ControlSignal(grid, std::vector<double>(grid.num_steps(), level));
}

ControlSignal ControlSignal::block(const TimeGrid& grid, double start, double end, double level)
{
    std::vector<double> v(grid.num_steps(), 0.0);
    start = std::max(start, 0.0);
    end   = std::min(end, grid.horizon());
    if (end > start) {
        const double dt = grid.dt();
        auto first      = static_cast<std::size_t>(std::floor(start / dt));
        for (std::size_t k = std::min(first, v.size() - 1); k < v.size(); ++k) {
            const double lo = grid.node(k), hi = grid.node(k + 1);
            if (lo >= end) {
                break;
            }
            const double overlap = std::min(hi, end) - std::max(lo, start);
            if (overlap > 0.0) {
                // full cells get exactly `level`, not a rounded ratio
                v[k] = (overlap >= (hi - lo) * (1.0 - 1e-12)) ? level : level * overlap / (hi - lo);
            }
        }
    }
    return ControlSignal(grid, std::move(v));
}

double ControlSignal::budget() const
{
    return grid.dt() * std::accumulate(values.begin(), values.end(), 0.0);
}

double ControlSignal::max_value() const
{
    return *std::max_element(values.begin(), values.end());
}

double ControlSignal::min_value() const
{
    return *std::min_element(values.begin(), values.end());
}

bool ControlSignal::is_feasible(double max_flux, double max_budget, double slack) const
{
    for (double u : values) {
        if (!std::isfinite(u) || u < -slack || u > max_flux + slack) {
            return false;
        }
    }
    return budget() <= max_budget + slack;
}

} // namespace wolbachia
