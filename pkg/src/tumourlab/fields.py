"""Secondary fields derived from the two species densities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import Grid, gradient_at_faces, second_difference
from .model import GrowthModel, eval_rates

VAC_TOL = 1e-12
TOL_POS = 1e-13


@dataclass(frozen=True)
class SimState:
    n1: np.ndarray
    n2: np.ndarray
    t: float
    gamma: float
    epsilon: float = 0.0

    @property
    def n(self) -> np.ndarray:
        return self.n1 + self.n2


@dataclass(frozen=True)
class DerivedFields:
    n: np.ndarray
    p: np.ndarray
    u: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    R: np.ndarray
    w: np.ndarray


def pressure_from_density(n, gamma: float, tol_pos: float = TOL_POS) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if not gamma > 1:
        raise DomainError(f"gamma must exceed 1, got {gamma}")
    if np.any(n < -tol_pos):
        raise DomainError(f"negative density {n.min():.3e} below -{tol_pos:g}")
    return np.maximum(n, 0.0) ** gamma


def fractions(n1, n2, vac_tol: float = VAC_TOL):
    """Population fractions; cells with total density <= vac_tol get (1/2, 1/2)."""
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    n = n1 + n2
    occupied = n > vac_tol
    safe = np.where(occupied, n, 1.0)
    c1 = np.where(occupied, n1 / safe, 0.5)
    c2 = np.where(occupied, n2 / safe, 0.5)
    return c1, c2


def reaction_field(c1, c2, p, model: GrowthModel) -> np.ndarray:
    r = eval_rates(model, p)
    return c1 * r.F + c2 * r.G


def fraction_sources(c1, c2, p, model: GrowthModel):
    """Reaction terms of the fraction equations (transport part excluded)."""
    r = eval_rates(model, p)
    s1 = c1 * r.F1 + c2 * r.G1 - c1 * c1 * r.F - c1 * c2 * r.G
    s2 = c1 * r.F2 + c2 * r.G2 - c2 * c2 * r.G - c1 * c2 * r.F
    return s1, s2


def ab_field(p, R, grid: Grid) -> np.ndarray:
    """w = p_xx + R."""
    return second_difference(p, grid) + R


def face_velocity(p, grid: Grid) -> np.ndarray:
    """Darcy velocity -dp/dx on faces; zero on the two boundary faces."""
    return -gradient_at_faces(p, grid)


def derive(state: SimState, grid: Grid, model: GrowthModel,
           vac_tol: float = VAC_TOL, tol_pos: float = TOL_POS) -> DerivedFields:
    n = state.n1 + state.n2
    p = pressure_from_density(n, state.gamma, tol_pos)
    c1, c2 = fractions(state.n1, state.n2, vac_tol)
    R = reaction_field(c1, c2, p, model)
    return DerivedFields(
        n=n, p=p, u=face_velocity(p, grid), c1=c1, c2=c2, R=R, w=ab_field(p, R, grid)
    )
