"""Estimate functionals, energy, complementarity residual and segregation.

Every function here is a plain numpy reference definition over one state.
Time accumulation (left-endpoint rule with the step's dt) is done by the
caller in ``tumourlab.simulation``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, fields
from typing import Iterable

import numpy as np

from .fields import DerivedFields, SimState
from .grid import Grid, integrate, second_difference
from .model import GrowthModel, antiderivatives, eval_rates


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass1: float
    mass2: float
    max_p: float
    min_n: float
    grad_p_L2_cum: float
    bv_c1: float
    bv_c2: float
    bv_n1: float
    bv_n2: float
    gamma_p_absw_cum: float
    w_minus_L1: float
    px_Linf: float
    pxx_L1: float
    energy: float
    dissipation_cum: float
    comp_residual: float
    seg_ncc: float
    seg_n1n2: float
    clamp_cum: float

    @property
    def bv_total(self) -> float:
        return self.bv_c1 + self.bv_c2 + self.bv_n1 + self.bv_n2


COLUMNS = tuple(f.name for f in fields(DiagnosticsRecord))


def estimate_grad_p_sq(derived: DerivedFields, grid: Grid) -> float:
    """dx times the sum of squared face velocities (boundary faces are 0)."""
    return float(grid.dx * np.sum(derived.u**2))


def total_variation(field) -> float:
    return float(np.sum(np.abs(np.diff(np.asarray(field, dtype=float)))))


def estimate_bv(n1, n2, c1, c2, grid: Grid | None = None):
    """Face-jump total variation of (n1, n2, c1, c2)."""
    return tuple(total_variation(f) for f in (n1, n2, c1, c2))


def estimate_w_pair(derived: DerivedFields, grid: Grid):
    """(integral of p|w|, integral of the negative part of w)."""
    p_absw = integrate(derived.p * np.abs(derived.w), grid)
    w_minus = integrate(np.maximum(-derived.w, 0.0), grid)
    return p_absw, w_minus


def pressure_norms(derived: DerivedFields, grid: Grid):
    px = float(np.max(np.abs(derived.u))) if derived.u.size else 0.0
    pxx = integrate(np.abs(second_difference(derived.p, grid)), grid)
    return px, pxx


def energy_and_dissipation(state: SimState, derived: DerivedFields, model: GrowthModel,
                           grid: Grid, gamma: float):
    """E = integral of |p_x|^2/2 - c1 H1(p) - c2 H2(p); D = gamma * integral of p w^2."""
    H1, H2 = antiderivatives(model, derived.p)
    grad = 0.5 * estimate_grad_p_sq(derived, grid)
    E = grad - integrate(derived.c1 * H1 + derived.c2 * H2, grid)
    D = gamma * integrate(derived.p * derived.w**2, grid)
    return E, D


def complementarity_residual(state: SimState, derived: DerivedFields, model: GrowthModel,
                             grid: Grid) -> float:
    r = eval_rates(model, derived.p)
    bracket = second_difference(derived.p, grid) + state.n1 * r.F + state.n2 * r.G
    return integrate(derived.p * np.abs(bracket), grid)


def segregation_indicators(state: SimState, derived: DerivedFields, grid: Grid):
    """(integral of n c1 c2, integral of n1 n2)."""
    ncc = integrate(derived.n * derived.c1 * derived.c2, grid)
    n1n2 = integrate(state.n1 * state.n2, grid)
    return ncc, n1n2


@dataclass(frozen=True)
class Violation:
    kind: str  # "nonnegativity", "lower_barrier", "upper_bound"
    cell: int
    magnitude: float

    def __str__(self):
        return f"{self.kind} violated by {self.magnitude:.3e} at cell {self.cell}"


def lower_barrier(epsilon: float, r_inf: float, t: float) -> float:
    return 2.0 * epsilon * math.exp(-r_inf * t)


def bounds_check(state: SimState, derived: DerivedFields, model: GrowthModel, grid: Grid,
                 check_upper: bool = True, p_tol: float = 0.0, barrier_tol: float = 0.0):
    """List of violations, worst cell per kind; empty when all bounds hold."""
    out = []
    for arr in (state.n1, state.n2):
        j = int(np.argmin(arr))
        if arr[j] < 0:
            out.append(Violation("nonnegativity", j, float(-arr[j])))
    if state.epsilon > 0:
        floor = lower_barrier(state.epsilon, model.R_inf, state.t)
        j = int(np.argmin(derived.n))
        gap = floor - float(derived.n[j])
        if gap > barrier_tol:
            out.append(Violation("lower_barrier", j, gap))
    if check_upper:
        j = int(np.argmax(derived.p))
        excess = float(derived.p[j]) - model.P_H
        if excess > p_tol:
            out.append(Violation("upper_bound", j, excess))
    return out


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip binary64."""
    return format(float(x), ".17g")


def write_records(path, records: Iterable[DiagnosticsRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for rec in records:
            w.writerow([fmt(v) for v in astuple(rec)])


def read_records(path) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError(f"{path}: unexpected diagnostics header")
    return [DiagnosticsRecord(*(float(v) for v in row)) for row in rows[1:]]
