"""Run-directory writers: snapshots, run metadata and the gnuplot script."""
from __future__ import annotations

import csv
import os

import numpy as np

from . import __version__
from .config import RunConfig, format_config
from .diagnostics import fmt
from .fields import DerivedFields, SimState
from .grid import Grid

SNAPSHOT_COLUMNS = ("x", "n1", "n2", "n", "p", "c1", "c2", "w")


def snapshot_name(t: float) -> str:
    return f"snapshot_t{t:.6g}.csv"


def write_snapshot(state: SimState, derived: DerivedFields, grid: Grid, path) -> None:
    cols = (grid.centers, state.n1, state.n2, derived.n, derived.p, derived.c1, derived.c2, derived.w)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_COLUMNS)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])


def read_snapshot(path) -> dict:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.asarray(data[name], dtype=float) for name in SNAPSHOT_COLUMNS}


def write_run_meta(path, cfg: RunConfig, notes=()) -> None:
    """Resolved config preceded by comment lines; parseable as a config file."""
    with open(path, "w") as fh:
        fh.write(f"# tumourlab {__version__}\n")
        for line in notes:
            fh.write(f"# {line}\n")
        fh.write(format_config(cfg))


def emit_plot_script(run_dir, times) -> str | None:
    """gnuplot script with one block per snapshot time: n1, n2 and p against x."""
    files = [snapshot_name(t) for t in times]
    files = [f for f in files if os.path.exists(os.path.join(run_dir, f))]
    if not files:
        return None
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'x'",
        f"set multiplot layout 1,{len(files)}",
    ]
    for f in files:
        lines.append(f"set title '{f[len('snapshot_t'):-len('.csv')]}'")
        lines.append(
            f"plot '{f}' using 1:2 with lines dt 1 title 'n1', "
            f"'{f}' using 1:3 with lines dt 2 title 'n2', "
            f"'{f}' using 1:5 with lines dt 3 title 'p'"
        )
    lines.append("unset multiplot")
    path = os.path.join(run_dir, "plots.gp")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
