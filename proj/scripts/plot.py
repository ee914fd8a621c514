#!/usr/bin/env python3
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
"""Plot the CSV outputs of a wolbachia run directory.

Usage: plot.py RUN_DIR [--out FIGURE]

Every recognised file in RUN_DIR gets its own panel: trajectory.csv, control.csv,
switching.csv, history.csv, sweep_eps.csv and sweep_c.csv.
"""

import argparse
import csv
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_columns(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name, value in row.items():
                try:
                    cols[name].append(float(value))
                except ValueError:
                    cols[name].append(value)
    return cols


def plot_trajectory(ax, cols):
    labels = ("n1 (wild)", "n2 (infected)") if "x2" in cols else ("p (infected frequency)",)
    for name, label in zip(("x1", "x2"), labels):
        if name in cols:
            ax.plot(cols["t"], cols[name], label=label)
    ax.set_xlabel("t")
    ax.set_title("state trajectory")
    ax.legend()


def plot_control(ax, cols):
    ax.step(cols["t"], cols["u"], where="post")
    ax.set_xlabel("t")
    ax.set_ylabel("u")
    ax.set_title("release rate")


def plot_switching(ax, cols):
    ax.plot(cols["t"], cols["w"], label="switching function")
    lam = [v for v in cols["lambda_est"] if isinstance(v, float) and math.isfinite(v)]
    if lam:
        ax.axhline(lam[0], color="k", linestyle="--", label="budget multiplier")
    ax.set_xlabel("t")
    ax.set_title("switching function")
    ax.legend()


def plot_history(ax, cols):
    ax.semilogy(cols["iter"], cols["kkt"], label="KKT residual")
    ax.set_xlabel("iteration")
    twin = ax.twinx()
    twin.plot(cols["iter"], cols["cost"], color="C1", label="cost")
    twin.set_ylabel("cost")
    ax.set_title("optimizer history")


def plot_sweep_eps(ax, cols):
    ax.loglog(cols["eps"], [abs(v) for v in cols["rel_gap"]], "o-", label="relative cost gap")
    ax.loglog(cols["eps"], cols["u_err_L1"], "s-", label="L1 control distance")
    ax.loglog(cols["eps"], cols["p_err_sup"], "^-", label="sup frequency error")
    ax.set_xlabel("eps")
    ax.set_title("convergence to the reduced problem")
    ax.legend()


def plot_sweep_c(ax, cols):
    ax.plot(cols["C"], cols["J0"], "o-")
    ax.set_xlabel("budget C")
    ax.set_ylabel("optimal reduced cost")
    ax.set_title("budget sweep")


PANELS = [
    ("trajectory.csv", plot_trajectory),
    ("control.csv", plot_control),
    ("switching.csv", plot_switching),
    ("history.csv", plot_history),
    ("sweep_eps.csv", plot_sweep_eps),
    ("sweep_c.csv", plot_sweep_c),
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("run_dir", type=Path)
    parser.add_argument("--out", type=Path, help="figure path (default RUN_DIR/plots.png)")
    args = parser.parse_args(argv)

    found = [(name, fn) for name, fn in PANELS if (args.run_dir / name).is_file()]
    if not found:
        print(f"no plottable CSV files in {args.run_dir}", file=sys.stderr)
        return 1

    fig, axes = plt.subplots(len(found), 1, figsize=(7, 3.2 * len(found)), squeeze=False)
    for ax, (name, fn) in zip(axes[:, 0], found):
        fn(ax, read_columns(args.run_dir / name))
    fig.tight_layout()

    out = args.out or args.run_dir / "plots.png"
    fig.savefig(out, dpi=120)
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
