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
"""Wolbachia release optimal control.

The compiled core lives in ``wolbachia._core``; everything is re-exported here.
Controls are 1-d numpy arrays of cell values on a uniform grid over [0, T].
"""

from ._core import (  # noqa: F401
    ConfigError,
    J0,
    J_eps,
    NumericalError,
    Params,
    c_star,
    derived_constants,
    gradient_full,
    gradient_reduced,
    optimize,
    project,
    run_command,
    simulate_full,
    simulate_reduced,
    simulate_slowfast,
    solve_reduced,
    steady_states,
)

__version__ = "0.1.0"
