#
# Copyright (C) 2026 The wolbachia-release authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
import json

import numpy as np
import pytest

import wolbachia as wb


@pytest.fixture
def params():
    return wb.Params()


def test_threshold_budget_and_theta(params):
    consts = wb.derived_constants(params)
    assert consts["theta"] == pytest.approx((1 - 0.27 * 0.9 / 0.3) / 0.9, abs=1e-12)
    assert abs(wb.c_star(10.0, params) - 0.24) < 0.01


def test_steady_state_labels(params):
    labels = {e["name"]: e["stability"] for e in wb.steady_states(params)}
    assert labels["wild_only"] == "stable"
    assert labels["infected_only"] == "stable"
    assert labels["coexistence"] == "unstable"


def test_analytic_cases_match_costs(params):
    early = wb.solve_reduced(0.75, 10.0, params, 10.0, 2000)
    late = wb.solve_reduced(0.15, 10.0, params, 10.0, 2000)
    assert early["case"] == "early_release"
    assert late["case"] == "late_release"
    u = early["control"]
    assert u.shape == (2000,)
    assert u.sum() * 10.0 / 2000 == pytest.approx(0.75, abs=1e-9)
    assert wb.J0(params, u, 10.0) == pytest.approx(early["predicted_cost"], rel=1e-12)


def test_trajectories_have_node_shape(params):
    u = np.full(500, 0.075)
    for sim in (wb.simulate_full, wb.simulate_slowfast):
        x = sim(params, u, 10.0)
        assert x.shape == (501, 2)
        assert np.all(np.isfinite(x))
    p = wb.simulate_reduced(params, u, 10.0)
    assert p.shape == (501, 1)
    assert np.all((p >= 0) & (p <= 1))


def test_gradients_agree_with_finite_differences(params):
    rng = np.random.default_rng(3)
    u = 0.02 + 0.01 * rng.random(1000)
    d = rng.uniform(-1, 1, 1000)
    g = wb.gradient_reduced(params, u, 10.0)
    assert np.all(g <= 1e-12)
    h = 1e-6
    fd = (wb.J0(params, u + h * d, 10.0) - wb.J0(params, u - h * d, 10.0)) / (2 * h)
    assert g @ d == pytest.approx(fd, rel=1e-4)


def test_projection_is_feasible_and_idempotent():
    raw = np.random.default_rng(5).uniform(-2, 14, 800)
    u = wb.project(raw, 0.4, 10.0, 10.0)
    assert u.min() >= 0 and u.max() <= 10.0
    assert u.sum() * 10.0 / 800 <= 0.4 + 1e-12
    assert np.max(np.abs(wb.project(u, 0.4, 10.0, 10.0) - u)) < 1e-12


def test_reduced_optimizer_finds_the_early_block(params):
    n = 6667
    dt = 10.0 / n
    res = wb.optimize(params, 0.75, 10.0, 10.0, n, reduced=True, max_iter=500)
    ref = wb.solve_reduced(0.75, 10.0, params, 10.0, n)
    assert res["cost"] <= ref["predicted_cost"] + 1e-6
    assert np.sum(np.abs(res["control"] - ref["control"])) * dt < 5 * dt * 10.0


def test_run_command_writes_outputs(tmp_path):
    cfg = {"out": str(tmp_path), "grid": {"dt": 0.01}}
    wb.run_command("solve-reduced", json.dumps(cfg))
    assert (tmp_path / "control.csv").read_text().startswith("t,u\n")
    assert (tmp_path / "config.json").exists()


def test_bad_config_raises():
    with pytest.raises(wb.ConfigError):
        wb.run_command("steady-states", json.dumps({"model": {"d1": -1.0}}))
