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

#include <gtest/gtest.h>

#include <cmath>

using namespace wolbachia;

TEST(TimeGrid, NodesAndStep)
{
    const TimeGrid g(10.0, 6667);
    EXPECT_EQ(g.node(0), 0.0);
    EXPECT_EQ(g.node(6667), 10.0);
    EXPECT_NEAR(g.dt(), 10.0 / 6667, 1e-18);
    EXPECT_EQ(TimeGrid::with_step(10.0, 0.0015).num_steps(), 6667u);
    EXPECT_EQ(TimeGrid::with_step(10.0, 0.0005).num_steps(), 20000u);
    EXPECT_THROW(TimeGrid(10.0, 0), std::invalid_argument);
    EXPECT_THROW(TimeGrid(-1.0, 10), std::invalid_argument);
}

TEST(ControlSignal, BlockKeepsTheExactBudget)
{
    const TimeGrid g(10.0, 6667);
    for (double start : {0.0, 1.23456, 9.925}) {
        const auto u = ControlSignal::block(g, start, start + 0.075, 10.0);
        EXPECT_NEAR(u.budget(), 0.75, 1e-13);
        EXPECT_LE(u.max_value(), 10.0);
        EXPECT_GE(u.min_value(), 0.0);
        int partial = 0;
        for (double v : u.values) {
            partial += v > 0.0 && v < 10.0;
        }
        EXPECT_LE(partial, 2);
    }
}

TEST(ControlSignal, AlignedBlockIsBangBang)
{
    const TimeGrid g(10.0, 200);
    const auto u = ControlSignal::block(g, 0.0, 0.5, 4.0);
    for (std::size_t k = 0; k < 200; ++k) {
        EXPECT_EQ(u.values[k], k < 10 ? 4.0 : 0.0);
    }
}

TEST(ControlSignal, Feasibility)
{
    const TimeGrid g(10.0, 100);
    EXPECT_TRUE(ControlSignal::constant(g, 0.075).is_feasible(10.0, 0.75));
    EXPECT_FALSE(ControlSignal::constant(g, 0.08).is_feasible(10.0, 0.75));
    EXPECT_FALSE(ControlSignal::constant(g, 11.0).is_feasible(10.0, 1000.0));
    EXPECT_THROW(ControlSignal(g, std::vector<double>(99, 0.0)), std::invalid_argument);
}
