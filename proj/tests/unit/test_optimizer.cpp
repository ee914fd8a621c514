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
#include "wolbachia/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace wolbachia;

namespace
{

const SlowFastParams reference{};

double l2(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    return std::sqrt(s);
}

// Brute-force projection oracle: the budget multiplier located by a dense scan plus secant refinement.
std::vector<double> projection_oracle(const std::vector<double>& raw, double M, double C, double dt)
{
    auto budget = [&](double lam) {
        double s = 0.0;
        for (double r : raw) {
            s += std::clamp(r - lam, 0.0, M);
        }
        return s * dt;
    };
    std::vector<double> out(raw.size());
    double lam = 0.0;
    if (budget(0.0) > C) {
        double lo = 0.0, hi = *std::max_element(raw.begin(), raw.end());
        for (int i = 0; i < 300; ++i) {
            const double mid = 0.5 * (lo + hi);
            (budget(mid) > C ? lo : hi) = mid;
        }
        lam = hi;
    }
    for (std::size_t k = 0; k < raw.size(); ++k) {
        out[k] = std::clamp(raw[k] - lam, 0.0, M);
    }
    return out;
}

} // namespace

TEST(Projection, FixesFeasiblePoints)
{
    const AdmissibleSet set{0.75, 10.0, TimeGrid(10.0, 1000)};
    const auto u = ControlSignal::block(set.grid, 1.0, 1.05, 10.0);
    EXPECT_EQ(project(u.values, set).values, u.values);
}

TEST(Projection, BoxOnlyWhenBudgetIsSlack)
{
    const AdmissibleSet set{1000.0, 10.0, TimeGrid(10.0, 100)};
    const auto p = project(std::vector<double>(100, 20.0), set);
    for (double v : p.values) {
        EXPECT_EQ(v, 10.0);
    }
}

TEST(Projection, SymmetricShift)
{
    const AdmissibleSet set{0.75, 10.0, TimeGrid(10.0, 6667)};
    const auto p = project(std::vector<double>(6667, 10.0), set);
    for (double v : p.values) {
        EXPECT_NEAR(v, 0.075, 1e-12);
    }
    EXPECT_NEAR(p.budget(), 0.75, 1e-12 * 0.75);
}

TEST(Projection, PropertiesOnRandomPairs)
{
    const AdmissibleSet set{0.75, 10.0, TimeGrid(10.0, 500)};
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> raw(-5.0, 15.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(500), b(500);
        for (std::size_t k = 0; k < 500; ++k) {
            a[k] = raw(rng) * (trial % 3 == 0 ? 0.01 : 1.0);
            b[k] = raw(rng);
        }
        const auto pa = project(a, set), pb = project(b, set);
        ASSERT_TRUE(pa.is_feasible(set.max_flux, set.budget));
        ASSERT_TRUE(pb.is_feasible(set.max_flux, set.budget));
        EXPECT_LE(l2(pa.values, pb.values), l2(a, b) + 1e-12);
        EXPECT_LT(l2(project(pa.values, set).values, pa.values), 1e-10);
        EXPECT_LT(l2(pa.values, projection_oracle(a, 10.0, 0.75, set.grid.dt())), 1e-8);
    }
}

TEST(L1Distance, Basics)
{
    const TimeGrid g(10.0, 1000);
    const auto early = ControlSignal::block(g, 0.0, 0.5, 10.0);
    const auto late  = ControlSignal::block(g, 9.5, 10.0, 10.0);
    EXPECT_EQ(l1_distance(early, early), 0.0);
    EXPECT_NEAR(l1_distance(early, late), 2 * 10.0 * 0.5, 1e-12);
    EXPECT_THROW(l1_distance(early, ControlSignal::zero(TimeGrid(10.0, 999))), std::invalid_argument);
}

TEST(L1Distance, CellAveragedBlockIsWithinOneCellOfTheSymbolicRelease)
{
    const TimeGrid g(10.0, 6667);
    const auto u = ControlSignal::block(g, 0.0, 0.075, 10.0);
    // exact L1 distance between the cell averages and M 1_[0, 0.075]
    double dist = 0.0;
    for (std::size_t k = 0; k < g.num_steps(); ++k) {
        const double lo = g.node(k), hi = g.node(k + 1);
        const double inside = std::clamp(std::min(hi, 0.075) - lo, 0.0, g.dt());
        dist += inside * std::abs(10.0 - u.values[k]) + (g.dt() - inside) * u.values[k];
    }
    EXPECT_LE(dist, g.dt() * 10.0);
}

TEST(Structure, ClassifiesSegments)
{
    const TimeGrid g(10.0, 1000);
    const auto u = ControlSignal::block(g, 0.0, 0.0755, 10.0);
    const auto r = structure_report(u, 10.0, 0.01);
    ASSERT_EQ(r.on_segments.size(), 1u);
    EXPECT_EQ(r.on_segments[0].first, 0u);
    EXPECT_LE(r.relax_cells(), 1u);
    EXPECT_TRUE(r.on_segments_anchored());

    const auto flat = structure_report(ControlSignal::constant(g, 0.075), 10.0, 0.01);
    EXPECT_TRUE(flat.on_segments.empty());
    ASSERT_EQ(flat.relax_segments.size(), 1u);
    EXPECT_EQ(flat.relax_segments[0], Segment(0, 999));
    EXPECT_THROW(structure_report(u, 10.0, 6.0), std::invalid_argument);
}

TEST(Optimize, ReducedProblemReachesTheAnalyticOptimum)
{
    const ReducedModel m(reference);
    const TimeGrid grid(10.0, 6667);
    for (double c : {0.15, 0.75}) {
        const AdmissibleSet set{c, 10.0, grid};
        const auto res = optimize(reduced_oracle(m), set, {}, default_inits(set, m));
        const auto sol = solve_reduced_analytic(c, 10.0, m, grid);
        EXPECT_LT(l1_distance(res.control, sol.control), 5 * grid.dt() * 10.0);
        EXPECT_LT(std::abs(res.cost - sol.predicted_cost), 1e-4);
        EXPECT_EQ(res.cost, J0(res.control, m));
        EXPECT_TRUE(res.control.is_feasible(10.0, c));
        EXPECT_NEAR(res.structure.budget_used, c, 1e-6 * c);
        EXPECT_EQ(switching_analysis(res.control, m, 10.0).violation_count, 0u);
        for (std::size_t i = 1; i < res.cost_history.size(); ++i) {
            EXPECT_LE(res.cost_history[i], res.cost_history[i - 1]);
        }
    }
}

TEST(Optimize, ResultDoesNotDependOnThreadCount)
{
    const ReducedModel m(reference);
    const AdmissibleSet set{0.4, 10.0, TimeGrid(10.0, 1000)};
    OptimOptions serial, parallel;
    parallel.jobs = 3;
    const auto inits = default_inits(set, m);
    const auto a = optimize(reduced_oracle(m), set, serial, inits);
    const auto b = optimize(reduced_oracle(m), set, parallel, inits);
    EXPECT_EQ(a.control.values, b.control.values);
    EXPECT_EQ(a.best_init, b.best_init);
    ASSERT_EQ(a.runs.size(), inits.size());
}

TEST(Optimize, SlowFastProblemImprovesOnNoRelease)
{
    const TimeGrid grid(10.0, 2000);
    const AdmissibleSet set{0.4, 10.0, grid};
    OptimOptions opts;
    opts.max_iter = 300;
    const auto res = optimize(slowfast_oracle(reference), set, opts, default_inits(set, ReducedModel(reference)));
    EXPECT_LT(res.cost, J_eps(ControlSignal::zero(grid), reference));
    EXPECT_NEAR(res.structure.budget_used, 0.4, 1e-6);
    EXPECT_TRUE(res.structure.on_segments_anchored());
    EXPECT_EQ(res.cost, J_eps(res.control, reference));
}

TEST(Optimize, DeadlineStopsEarly)
{
    const ReducedModel m(reference);
    const AdmissibleSet set{0.4, 10.0, TimeGrid(10.0, 1000)};
    OptimOptions opts;
    opts.deadline = std::chrono::steady_clock::now();
    const auto res = optimize(reduced_oracle(m), set, opts, {ControlSignal::zero(set.grid)});
    EXPECT_EQ(res.runs[0].status, "deadline");
    EXPECT_FALSE(res.converged);
}

TEST(AdmissibleSet, Validation)
{
    const AdmissibleSet bad{-1.0, 0.0, TimeGrid(10.0, 10)};
    EXPECT_EQ(bad.violations().size(), 2u);
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}
