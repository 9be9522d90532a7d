"""Mass-coordinate (Lagrangian) scheme for the two-species system.

Both species move with the same Darcy velocity v = -dp/dx, so in 1D each
material cell carries its own species masses and only reactions change
them.  Cell boundaries move with v evaluated from neighbouring cell
pressures; a free boundary next to vacuum uses p = 0 at the front.  Without
cross reactions a cell that holds no species-2 mass never acquires any, so
segregated data stay segregated exactly, which no fixed-grid upwind scheme
can offer once two species fronts meet.

Vacuum is kept as single zero-mass cells.  When two fronts close a vacuum
gap the step is shortened to land exactly on the contact and the gap is
removed.  A gap touching the wall closing means the support reached the
boundary, which is an error.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalFailure, SupportError
from .fields import SimState
from .grid import Grid
from .model import GrowthModel, eval_rates
from .solver import SchemeConfig, StepReport


@dataclass(frozen=True)
class LagrangianState:
    nodes: np.ndarray  # K+1 positions, nodes[0] = -L, nodes[-1] = L
    m1: np.ndarray  # K species-1 masses
    m2: np.ndarray
    t: float
    gamma: float
    epsilon: float = 0.0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def vacuum(self) -> np.ndarray:
        return (self.m1 + self.m2) == 0.0

    def density(self) -> np.ndarray:
        h = self.widths
        m = self.m1 + self.m2
        return np.where(m > 0, m / np.where(h > 0, h, 1.0), 0.0)

    def pressure(self) -> np.ndarray:
        return self.density() ** self.gamma


def from_sim_state(state: SimState, grid: Grid) -> LagrangianState:
    """Grid cells become material cells; each run of empty cells becomes one gap."""
    m1 = np.asarray(state.n1, dtype=float) * grid.dx
    m2 = np.asarray(state.n2, dtype=float) * grid.dx
    faces = grid.faces
    empty = (m1 + m2) == 0.0
    keep = np.ones(grid.N, dtype=bool)
    keep[1:] = ~(empty[1:] & empty[:-1])
    # a cell is dropped when it continues a vacuum run; its right face
    # then belongs to the previous kept cell
    node_keep = np.concatenate(([True], np.append(keep[1:], True)))
    return LagrangianState(
        nodes=np.array(faces[node_keep], dtype=float),
        m1=m1[keep].copy(),
        m2=m2[keep].copy(),
        t=state.t,
        gamma=state.gamma,
        epsilon=state.epsilon,
    )


def to_sim_state(lst: LagrangianState, grid: Grid) -> SimState:
    """Conservative remap onto the grid (density uniform inside each cell)."""
    out = []
    for m in (lst.m1, lst.m2):
        cum = np.concatenate(([0.0], np.cumsum(m)))
        at_faces = np.interp(grid.faces, lst.nodes, cum)
        out.append(np.maximum(np.diff(at_faces), 0.0) / grid.dx)
    return SimState(out[0], out[1], lst.t, lst.gamma, lst.epsilon)


def node_velocities(lst: LagrangianState) -> np.ndarray:
    h = lst.widths
    p = lst.pressure()
    vac = lst.vacuum
    v = np.zeros(lst.nodes.size)
    if h.size < 2:
        return v
    a, b = vac[:-1], vac[1:]
    hl, hr, pl, pr = h[:-1], h[1:], p[:-1], p[1:]
    safe_l = np.where(hl > 0, hl, 1.0)
    safe_r = np.where(hr > 0, hr, 1.0)
    both = -(pr - pl) / (0.5 * (safe_l + safe_r))
    front_right = 2.0 * pl / safe_l  # material on the left, vacuum on the right
    front_left = -2.0 * pr / safe_r
    v[1:-1] = np.where(~a & ~b, both, np.where(~a & b, front_right, np.where(a & ~b, front_left, 0.0)))
    return v


def stable_dt(lst: LagrangianState, config: SchemeConfig, r_inf: float = 0.0) -> float:
    h = lst.widths
    p = lst.pressure()
    v = np.abs(node_velocities(lst))
    vmax = np.maximum(v[:-1], v[1:])
    mat = ~lst.vacuum
    dt = config.dt_max
    if np.any(mat):
        denom = 2.0 * lst.gamma * p[mat] + 2.0 * h[mat] * vmax[mat]
        pos = denom > 0
        if np.any(pos):
            dt = min(dt, float(np.min(config.cfl * h[mat][pos] ** 2 / denom[pos])))
    if r_inf > 0:
        dt = min(dt, config.cfl / r_inf)
    return dt


def lagrangian_step(lst: LagrangianState, model: GrowthModel, config: SchemeConfig, dt: float):
    """Advance by dt, or less if a vacuum gap closes first."""
    h = lst.widths
    p = lst.pressure()
    v = node_velocities(lst)
    vac = lst.vacuum

    collapse = None
    closing = v[:-1] - v[1:]
    gaps = np.nonzero(vac & (closing > 0))[0]
    if gaps.size:
        t_close = h[gaps] / closing[gaps]
        k = int(np.argmin(t_close))
        if t_close[k] <= dt:
            dt = float(t_close[k])
            collapse = int(gaps[k])

    r = eval_rates(model, p)
    src1 = lst.m1 * r.F1 + lst.m2 * r.G1
    src2 = lst.m1 * r.F2 + lst.m2 * r.G2
    m1 = lst.m1 + dt * src1
    m2 = lst.m2 + dt * src2
    nodes = lst.nodes + dt * v

    if collapse is not None:
        k = collapse
        if k == 0 or k == m1.size - 1:
            raise SupportError(
                f"support reached the domain boundary at t = {lst.t + dt:.6g}; increase grid.L"
            )
        meet = 0.5 * (nodes[k] + nodes[k + 1])
        nodes = np.delete(nodes, k + 1)
        nodes[k] = meet
        m1 = np.delete(m1, k)
        m2 = np.delete(m2, k)

    lo = float(min(m1.min(), m2.min())) if m1.size else 0.0
    if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(m1)) and np.all(np.isfinite(m2))):
        raise NumericalFailure("non-finite Lagrangian state")
    if lo < 0:
        raise NumericalFailure(f"negative cell mass {lo:.3e}")
    if np.any(np.diff(nodes) <= 0):
        raise NumericalFailure("Lagrangian cells crossed; reduce cfl")

    new = replace(lst, nodes=nodes, m1=m1, m2=m2, t=lst.t + dt)
    n_new = new.density()
    report = StepReport(
        dt_used=dt,
        max_p=float(np.max(n_new) ** lst.gamma) if n_new.size else 0.0,
        min_n=lo,
        source_mass=dt * float(np.sum(src1 + src2)),
    )
    return new, report


def segregation_native(lst: LagrangianState):
    """(integral of n c1 c2, integral of n1 n2) evaluated cell by cell."""
    m = lst.m1 + lst.m2
    h = lst.widths
    prod = lst.m1 * lst.m2
    mat = m > 0
    seg_ncc = float(np.sum(prod[mat] / m[mat]))
    seg_n1n2 = float(np.sum(prod[mat] / h[mat]))
    return seg_ncc, seg_n1n2
