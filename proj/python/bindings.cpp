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
#include "wolbachia/harness.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wolbachia;

namespace
{

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ControlSignal to_control(const Array& values, double horizon)
{
    if (values.ndim() != 1 || values.size() == 0) {
        throw std::invalid_argument("control must be a non-empty 1-d array");
    }
    const TimeGrid grid(horizon, static_cast<std::size_t>(values.size()));
    return ControlSignal(grid, std::vector<double>(values.data(), values.data() + values.size()));
}

Array to_array(const std::vector<double>& v)
{
    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
    const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(double))};
    return Array(shape, strides, v.data());
}

template <int Dim>
Array states_array(const Trajectory<Dim>& traj)
{
    Array out({static_cast<py::ssize_t>(traj.states.size()), static_cast<py::ssize_t>(Dim)});
    auto view = out.template mutable_unchecked<2>();
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        for (int i = 0; i < Dim; ++i) {
            view(static_cast<py::ssize_t>(k), i) = traj.states[k][i];
        }
    }
    return out;
}

py::dict optim_dict(const OptimResult& r)
{
    py::dict d;
    d["control"]      = to_array(r.control.values);
    d["cost"]         = r.cost;
    d["cost_history"] = r.cost_history;
    d["kkt_residual"] = r.kkt_residual;
    d["iterations"]   = r.n_iterations;
    d["converged"]    = r.converged;
    d["status"]       = r.runs.at(r.best_init).status;
    d["structure"]    = r.structure.to_text();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Wolbachia release optimal control: models, adjoints and optimizer";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<SlowFastParams>(m, "Params")
        .def(py::init<>())
        .def(py::init([](double b1_0, double b2_0, double d1, double d2, double s_h, double K, double eps) {
                 return SlowFastParams{b1_0, b2_0, d1, d2, s_h, K, eps};
             }),
             py::arg("b1_0") = 1.0, py::arg("b2_0") = 0.9, py::arg("d1") = 0.27, py::arg("d2") = 0.3,
             py::arg("s_h") = 0.9, py::arg("K") = 1.0, py::arg("eps") = 1.0)
        .def_readwrite("b1_0", &SlowFastParams::b1_0)
        .def_readwrite("b2_0", &SlowFastParams::b2_0)
        .def_readwrite("d1", &SlowFastParams::d1)
        .def_readwrite("d2", &SlowFastParams::d2)
        .def_readwrite("s_h", &SlowFastParams::s_h)
        .def_readwrite("K", &SlowFastParams::K)
        .def_readwrite("eps", &SlowFastParams::eps)
        .def("violations", &SlowFastParams::violations)
        .def("__repr__", [](const SlowFastParams& p) {
            return "Params(b1_0=" + format_double(p.b1_0) + ", b2_0=" + format_double(p.b2_0) +
                   ", d1=" + format_double(p.d1) + ", d2=" + format_double(p.d2) + ", s_h=" + format_double(p.s_h) +
                   ", K=" + format_double(p.K) + ", eps=" + format_double(p.eps) + ")";
        });

    m.def(
        "steady_states",
        [](const SlowFastParams& p) {
            py::list out;
            for (const auto& e : classify_stability(p.to_model_params()).entries) {
                py::dict d;
                d["name"]      = e.name;
                d["state"]     = py::make_tuple(e.state.n1, e.state.n2);
                d["stability"] = to_string(e.label);
                d["eigenvalues"] = py::make_tuple(e.eigenvalues[0], e.eigenvalues[1]);
                out.append(d);
            }
            return out;
        },
        py::arg("params"), "Steady states of the (n1, n2) system with eigenvalues and stability labels.");

    m.def(
        "derived_constants",
        [](const SlowFastParams& p) {
            const auto c = derived_constants(p);
            py::dict d;
            d["theta"]      = c.theta;
            d["xi"]         = c.xi;
            d["p_star"]     = c.p_star;
            d["max_neg_fg"] = c.max_neg_fg;
            return d;
        },
        py::arg("params"));

    m.def("c_star", [](double M, const SlowFastParams& p) { return C_star(M, ReducedModel(p)); }, py::arg("M"),
          py::arg("params"), "Budget a saturated release of flux M needs to reach the threshold.");

    m.def(
        "solve_reduced",
        [](double C, double M, const SlowFastParams& p, double T, std::size_t steps) {
            const auto sol = solve_reduced_analytic(C, M, ReducedModel(p), TimeGrid(T, steps));
            py::dict d;
            d["case"]           = to_string(sol.case_label);
            d["start"]          = sol.start;
            d["end"]            = sol.end;
            d["level"]          = sol.level;
            d["control"]        = to_array(sol.control.values);
            d["predicted_cost"] = sol.predicted_cost;
            d["c_star"]         = sol.c_star;
            return d;
        },
        py::arg("C"), py::arg("M"), py::arg("params"), py::arg("T") = 10.0, py::arg("steps") = 6667);

    m.def(
        "simulate_full",
        [](const SlowFastParams& p, const Array& u, double T) {
            return states_array(simulate_full(p.to_model_params(), to_control(u, T)));
        },
        py::arg("params"), py::arg("control"), py::arg("T") = 10.0, "Nodes of the (n1, n2) trajectory.");
    m.def(
        "simulate_slowfast",
        [](const SlowFastParams& p, const Array& u, double T) { return states_array(simulate_slowfast(p, to_control(u, T))); },
        py::arg("params"), py::arg("control"), py::arg("T") = 10.0, "Nodes of the (n, p) trajectory.");
    m.def(
        "simulate_reduced",
        [](const SlowFastParams& p, const Array& u, double T) {
            return states_array(simulate_reduced(ReducedModel(p), to_control(u, T)));
        },
        py::arg("params"), py::arg("control"), py::arg("T") = 10.0);

    m.def("J_eps", [](const SlowFastParams& p, const Array& u, double T) { return J_eps(to_control(u, T), p); },
          py::arg("params"), py::arg("control"), py::arg("T") = 10.0);
    m.def("J0", [](const SlowFastParams& p, const Array& u, double T) { return J0(to_control(u, T), ReducedModel(p)); },
          py::arg("params"), py::arg("control"), py::arg("T") = 10.0);

    m.def(
        "gradient_reduced",
        [](const SlowFastParams& p, const Array& u, double T) {
            return to_array(gradient_reduced(to_control(u, T), ReducedModel(p)).values);
        },
        py::arg("params"), py::arg("control"), py::arg("T") = 10.0);
    m.def(
        "gradient_full",
        [](const SlowFastParams& p, const Array& u, double T) { return to_array(gradient_full(to_control(u, T), p).values); },
        py::arg("params"), py::arg("control"), py::arg("T") = 10.0);

    m.def(
        "project",
        [](const Array& raw, double C, double M, double T) {
            const auto grid = to_control(raw, T).grid;
            return to_array(project(std::vector<double>(raw.data(), raw.data() + raw.size()), {C, M, grid}).values);
        },
        py::arg("raw"), py::arg("C"), py::arg("M"), py::arg("T") = 10.0);

    m.def(
        "optimize",
        [](const SlowFastParams& p, double C, double M, double T, std::size_t steps, bool reduced, int max_iter,
           int jobs) {
            const AdmissibleSet set{C, M, TimeGrid(T, steps)};
            OptimOptions opts;
            opts.max_iter = max_iter;
            opts.jobs     = jobs;
            std::optional<ReducedModel> model;
            try {
                model.emplace(p);
            }
            catch (const NoCoexistence&) {
                if (reduced) {
                    throw;
                }
            }
            const auto oracle = reduced ? reduced_oracle(*model) : slowfast_oracle(p);
            const auto inits  = default_inits(set, model);
            std::optional<OptimResult> result;
            {
                py::gil_scoped_release release;
                result.emplace(optimize(oracle, set, opts, inits));
            }
            return optim_dict(*result);
        },
        py::arg("params"), py::arg("C"), py::arg("M") = 10.0, py::arg("T") = 10.0, py::arg("steps") = 6667,
        py::arg("reduced") = false, py::arg("max_iter") = 5000, py::arg("jobs") = 1,
        "Projected-gradient optimization over the default initial controls.");

    m.def(
        "run_command",
        [](const std::string& name, const std::string& config_json) {
            const RunConfig config = parse_config(config_json);
            if (name == "steady-states") return cmd_steady_states(config);
            if (name == "simulate") return cmd_simulate(config);
            if (name == "solve-reduced") return cmd_solve_reduced(config);
            if (name == "optimize-full") return cmd_optimize_full(config);
            if (name == "sweep-eps") return cmd_sweep_eps(config);
            if (name == "sweep-c") return cmd_sweep_c(config);
            throw std::invalid_argument("unknown command " + name);
        },
        py::arg("name"), py::arg("config_json") = "{}",
        "Runs a harness command with a JSON configuration and returns its summary.");
}
