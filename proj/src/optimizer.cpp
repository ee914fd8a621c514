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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace wolbachia
{

std::vector<std::string> AdmissibleSet::violations() const
{
    std::vector<std::string> out;
    if (!(std::isfinite(budget) && budget > 0.0)) out.push_back("C must be > 0");
    if (!(std::isfinite(max_flux) && max_flux > 0.0)) out.push_back("M must be > 0");
    if (!(std::isfinite(grid.horizon()) && grid.horizon() > 0.0)) out.push_back("T must be > 0");
    return out;
}

void AdmissibleSet::validate() const
{
    const auto v = violations();
    if (!v.empty()) {
        std::ostringstream msg;
        msg << "invalid admissible set:";
        for (const auto& s : v) {
            msg << ' ' << s << ';';
        }
        throw std::invalid_argument(msg.str());
    }
}

ControlSignal project(const std::vector<double>& raw, const AdmissibleSet& set)
{
    const std::size_t n = set.grid.num_steps();
    if (raw.size() != n) {
        throw std::invalid_argument("project: size does not match the grid");
    }
    const double dt = set.grid.dt(), M = set.max_flux, C = set.budget;
    auto shifted = [&](double lam) {
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k) {
            v[k] = std::clamp(raw[k] - lam, 0.0, M);
        }
        return v;
    };
    auto budget_of = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) {
            s += x;
        }
        return s * dt;
    };

    std::vector<double> clipped = shifted(0.0);
    if (budget_of(clipped) <= C * (1.0 + 1e-14)) {
        return ControlSignal(set.grid, std::move(clipped));
    }

    double lo = 0.0, hi = *std::max_element(raw.begin(), raw.end());
    double lam = hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double b = budget_of(shifted(mid));
        (b > C ? lo : hi) = mid;
        lam = hi;
        if (std::abs(b - C) < 1e-12 * C) {
            lam = mid;
            break;
        }
    }

    // The budget is affine in lam while the active set is fixed, so a few exact solves on the
    // active set seen at lam remove the remaining bisection error.
    double error = std::abs(budget_of(shifted(lam)) - C);
    for (int pass = 0; pass < 5 && error > 0.0; ++pass) {
        double saturated = 0.0, free_sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double v = raw[k] - lam;
            if (v >= M) {
                saturated += M;
            }
            else if (v > 0.0) {
                free_sum += raw[k];
                ++free_count;
            }
        }
        if (free_count == 0) {
            break;
        }
        const double exact = (saturated + free_sum - C / dt) / static_cast<double>(free_count);
        if (!(exact >= 0.0)) {
            break;
        }
        const double exact_error = std::abs(budget_of(shifted(exact)) - C);
        if (!(exact_error < error)) {
            break;
        }
        lam   = exact;
        error = exact_error;
    }
    return ControlSignal(set.grid, shifted(std::max(lam, 0.0)));
}

double l1_distance(const ControlSignal& u1, const ControlSignal& u2)
{
    if (!(u1.grid == u2.grid)) {
        throw std::invalid_argument("l1_distance: controls live on different grids");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < u1.values.size(); ++k) {
        s += std::abs(u1.values[k] - u2.values[k]);
    }
    return s * u1.grid.dt();
}

bool StructureReport::on_segments_anchored() const
{
    return std::all_of(on_segments.begin(), on_segments.end(), [&](const Segment& s) {
        return s.first == 0 || s.second + 1 == num_cells;
    });
}

std::size_t StructureReport::relax_cells() const
{
    std::size_t c = 0;
    for (const auto& s : relax_segments) {
        c += s.second - s.first + 1;
    }
    return c;
}

std::string StructureReport::to_text() const
{
    std::ostringstream out;
    out.precision(17);
    auto list = [&](const char* name, const std::vector<Segment>& segs) {
        out << name << ' ' << segs.size();
        for (const auto& s : segs) {
            out << " [" << s.first + 1 << ',' << s.second + 1 << ']';
        }
        out << '\n';
    };
    out << "cells " << num_cells << '\n';
    out << "kappa " << kappa << '\n';
    list("I_M", on_segments);
    list("I_relax", relax_segments);
    out << "budget_used " << budget_used << '\n';
    out << "anchored " << (on_segments_anchored() ? "yes" : "no") << '\n';
    return out.str();
}

StructureReport structure_report(const ControlSignal& control, double max_flux, double kappa)
{
    if (!(kappa > 0.0 && kappa < 0.5 * max_flux)) {
        throw std::invalid_argument("structure_report: kappa must lie in (0, M/2)");
    }
    StructureReport r;
    r.kappa       = kappa;
    r.num_cells   = control.values.size();
    r.budget_used = control.budget();
    auto collect = [&](auto&& member, std::vector<Segment>& out) {
        for (std::size_t k = 0; k < r.num_cells; ++k) {
            if (!member(control.values[k])) {
                continue;
            }
            if (!out.empty() && out.back().second + 1 == k) {
                out.back().second = k;
            }
            else {
                out.emplace_back(k, k);
            }
        }
    };
    collect([&](double u) { return u >= max_flux - kappa; }, r.on_segments);
    collect([&](double u) { return u >= kappa && u <= max_flux - kappa; }, r.relax_segments);
    return r;
}

Oracle reduced_oracle(const ReducedModel& model)
{
    return [model](const ControlSignal& u) {
        return cost_gradient_reduced(u, model);
    };
}

Oracle slowfast_oracle(const SlowFastParams& params)
{
    return [params](const ControlSignal& u) {
        return cost_gradient_slowfast(u, params);
    };
}

namespace
{

struct Run {
    ControlSignal control;
    double cost = std::numeric_limits<double>::infinity();
    std::vector<double> costs, kkts;
    RunRecord record;
};

std::vector<double> descent_point(const ControlSignal& u, const GradientSignal& g, double step)
{
    const double dt = u.grid.dt();
    std::vector<double> raw(u.values.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        raw[k] = u.values[k] - step * g.values[k] / dt;
    }
    return raw;
}

double kkt_residual(const ControlSignal& u, const GradientSignal& g, const AdmissibleSet& set)
{
    const ControlSignal p = project(descent_point(u, g, 1.0), set);
    double r = 0.0;
    for (std::size_t k = 0; k < p.values.size(); ++k) {
        r = std::max(r, std::abs(p.values[k] - u.values[k]));
    }
    return r;
}

Run descend(const Oracle& oracle, const AdmissibleSet& set, const OptimOptions& opts, const ControlSignal& init)
{
    Run run{project(init.values, set), std::numeric_limits<double>::infinity(), {}, {}, {}};
    CostGradient cg = oracle(run.control);
    double kkt      = kkt_residual(run.control, cg.gradient, set);
    run.costs.push_back(cg.cost);
    run.kkts.push_back(kkt);

    const double dt = set.grid.dt();
    double step     = 1.0, last_step = 1.0;
    std::vector<double> prev_u, prev_g;
    int iter = 0;
    std::string status = "max_iter";
    while (true) {
        if (kkt < opts.tol) {
            status = "converged";
            break;
        }
        if (iter >= opts.max_iter) {
            break;
        }
        if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline) {
            status = "deadline";
            break;
        }
        if (opts.bb_steps && !prev_u.empty()) {
            // BB1 step in the L2 metric, alternated with BB2 to damp oscillation
            double ss = 0.0, sy = 0.0, yy = 0.0;
            for (std::size_t k = 0; k < prev_u.size(); ++k) {
                const double s = run.control.values[k] - prev_u[k];
                const double y = (cg.gradient.values[k] - prev_g[k]) / dt;
                ss += s * s;
                sy += s * y;
                yy += y * y;
            }
            // along negative curvature the quadratic model has no minimizer, so expand instead
            step = sy > 0.0 ? ((iter % 2 == 0) ? ss / sy : sy / yy) : 4.0 * last_step;
            step = std::clamp(step, 1e-10, 1e10);
        }
        else {
            step = 1.0;
        }
        bool accepted = false;
        for (int b = 0; b <= opts.max_backtracks; ++b) {
            ControlSignal trial = project(descent_point(run.control, cg.gradient, step), set);
            double decrease     = 0.0;
            for (std::size_t k = 0; k < trial.values.size(); ++k) {
                decrease += cg.gradient.values[k] * (trial.values[k] - run.control.values[k]);
            }
            if (!(decrease < 0.0)) {
                // no first-order decrease left above rounding in the projected budget
                step *= opts.backtrack;
                continue;
            }
            CostGradient next;
            try {
                next = oracle(trial);
            }
            catch (const NumericalError&) {
                step *= opts.backtrack;
                continue;
            }
            if (next.cost <= cg.cost + opts.armijo_slope * decrease) {
                prev_u = std::move(run.control.values);
                prev_g = std::move(cg.gradient.values);
                run.control = std::move(trial);
                cg          = std::move(next);
                last_step   = step;
                accepted    = true;
                break;
            }
            step *= opts.backtrack;
        }
        if (!accepted) {
            status = "stalled";
            break;
        }
        ++iter;
        kkt = kkt_residual(run.control, cg.gradient, set);
        run.costs.push_back(cg.cost);
        run.kkts.push_back(kkt);
    }
    run.cost   = cg.cost;
    run.record = RunRecord{cg.cost, kkt, iter, status == "converged", status};
    return run;
}

} // namespace

OptimResult optimize(const Oracle& oracle, const AdmissibleSet& set, const OptimOptions& opts,
                     const std::vector<ControlSignal>& inits)
{
    set.validate();
    if (inits.empty()) {
        throw std::invalid_argument("optimize: no initial controls");
    }
    for (const auto& u : inits) {
        if (!(u.grid == set.grid)) {
            throw std::invalid_argument("optimize: an initial control uses a different grid");
        }
    }

    std::vector<std::optional<Run>> runs(inits.size());
    std::vector<std::string> errors(inits.size());
    auto work = [&](std::size_t i) {
        try {
            runs[i] = descend(oracle, set, opts, inits[i]);
        }
        catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };
    const std::size_t width = static_cast<std::size_t>(std::max(1, opts.jobs));
    if (width == 1) {
        for (std::size_t i = 0; i < inits.size(); ++i) {
            work(i);
        }
    }
    else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(width, inits.size()); ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < inits.size(); i += width) {
                    work(i);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    OptimResult out;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i]) {
            out.runs.push_back(runs[i]->record);
            if (!best || runs[i]->cost < runs[*best]->cost) {
                best = i;
            }
        }
        else {
            RunRecord failed;
            failed.cost   = std::numeric_limits<double>::quiet_NaN();
            failed.status = "error: " + errors[i];
            out.runs.push_back(failed);
        }
    }
    if (!best) {
        throw NumericalError("optimize: every initialization failed (" + errors.front() + ")");
    }
    Run& r           = *runs[*best];
    out.best_init    = *best;
    out.control      = std::move(r.control);
    out.cost         = r.cost;
    out.cost_history = std::move(r.costs);
    out.kkt_history  = std::move(r.kkts);
    out.kkt_residual = r.record.kkt;
    out.n_iterations = r.record.iterations;
    out.converged    = r.record.converged;
    out.structure    = structure_report(out.control, set.max_flux, 1e-3 * set.max_flux);
    return out;
}

std::vector<ControlSignal> default_inits(const AdmissibleSet& set, const std::optional<ReducedModel>& model,
                                         std::uint64_t seed, int num_random)
{
    set.validate();
    const std::size_t n = set.grid.num_steps();
    const double M = set.max_flux, T = set.horizon();
    std::vector<ControlSignal> inits;
    inits.push_back(ControlSignal::zero(set.grid));
    inits.push_back(ControlSignal::constant(set.grid, std::min(set.budget / T, M)));
    inits.push_back(project(std::vector<double>(n, M), set));
    if (model && T > set.budget / M) {
        try {
            inits.push_back(solve_reduced_analytic(set.budget, M, *model, set.grid).control);
        }
        catch (const NumericalError&) {
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, M);
    for (int r = 0; r < num_random; ++r) {
        std::vector<double> raw(n);
        for (auto& v : raw) {
            v = uniform(rng);
        }
        inits.push_back(project(raw, set));
    }
    return inits;
}

} // namespace wolbachia
