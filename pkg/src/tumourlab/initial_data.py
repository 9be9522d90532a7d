"""Initial profiles and the well-preparedness audit."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .fields import fractions, pressure_from_density
from .grid import Grid, integrate, second_difference
from .model import GrowthModel

SHAPES = {"indicator": 3, "bump": 3, "uniform": 1}


@dataclass(frozen=True)
class ProfileSpec:
    shape: str
    params: tuple

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown profile shape {self.shape!r}")
        if len(self.params) != SHAPES[self.shape]:
            raise ValueError(f"{self.shape} takes {SHAPES[self.shape]} arguments")
        if self.height < 0:
            raise ValueError(f"profile height must be >= 0, got {self.height}")
        if self.shape == "indicator" and not self.params[0] < self.params[1]:
            raise ValueError("indicator needs x0 < x1")
        if self.shape == "bump" and not self.params[1] > 0:
            raise ValueError("bump width must be positive")

    @property
    def height(self) -> float:
        return float(self.params[-1])

    @classmethod
    def parse(cls, text: str) -> "ProfileSpec":
        m = re.fullmatch(r"\s*(\w+)\s*\(([^()]*)\)\s*", text)
        if not m:
            raise ConfigError(f"cannot parse profile {text!r}")
        try:
            params = tuple(float(a) for a in m.group(2).split(","))
            return cls(m.group(1), params)
        except ValueError as exc:
            raise ConfigError(f"bad profile {text!r}: {exc}") from None

    def __str__(self):
        return f"{self.shape}({', '.join(repr(float(v)) for v in self.params)})"

    def support(self):
        if self.shape == "indicator":
            return self.params[0], self.params[1]
        if self.shape == "bump":
            c, w, _ = self.params
            return c - w, c + w
        return -np.inf, np.inf

    def sample(self, grid: Grid) -> np.ndarray:
        if self.shape == "uniform":
            return np.full(grid.N, self.height)
        if self.shape == "indicator":
            x0, x1, h = self.params
            faces = grid.faces
            overlap = np.minimum(faces[1:], x1) - np.maximum(faces[:-1], x0)
            # clip guards the rounding in face differences for fully covered cells
            return h * np.clip(overlap / grid.dx, 0.0, 1.0)
        c, w, h = self.params
        r = (grid.centers - c) / w
        out = np.zeros(grid.N)
        inside = np.abs(r) < 1.0
        out[inside] = h * np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
        return out


def build_initial(profiles1, profiles2, grid: Grid, check_support: bool = True):
    """Sum the profiles of each species on the grid.

    Non-uniform profiles must sit inside (-L/2, L/2).
    """
    out = []
    for specs in (profiles1, profiles2):
        n = np.zeros(grid.N)
        for spec in specs:
            lo, hi = spec.support()
            if check_support and spec.shape != "uniform" and spec.height > 0:
                if lo < -grid.L / 2 or hi > grid.L / 2:
                    raise DomainError(
                        f"profile {spec} leaves (-L/2, L/2) = ({-grid.L / 2:g}, {grid.L / 2:g})"
                    )
            n += spec.sample(grid)
        out.append(n)
    return out[0], out[1]


@dataclass(frozen=True)
class AuditReport:
    max_p0: float
    P_H: float
    pxx_L1: float
    tv_c1: float
    tv_c2: float
    tv_n1: float
    tv_n2: float
    N: int

    @property
    def pressure_ok(self) -> bool:
        return self.max_p0 <= self.P_H

    def lines(self):
        flag = "pass" if self.pressure_ok else "FLAGGED"
        yield f"max p(0) = {self.max_p0:.6g} vs P_H = {self.P_H:g}: {flag}"
        yield f"pxx_L1(0) = {self.pxx_L1:.6g} (N = {self.N})"
        yield f"TV c1 = {self.tv_c1:.6g}, TV c2 = {self.tv_c2:.6g}"
        yield f"TV n1 = {self.tv_n1:.6g}, TV n2 = {self.tv_n2:.6g}"


def audit_well_prepared(n1, n2, gamma: float, epsilon: float, model: GrowthModel,
                        grid: Grid, vac_tol: float = 1e-12) -> AuditReport:
    """Advisory checks on initial data; never raises on bad data."""
    n1 = np.asarray(n1, dtype=float) + epsilon
    n2 = np.asarray(n2, dtype=float) + epsilon
    p = pressure_from_density(n1 + n2, gamma)
    c1, c2 = fractions(n1, n2, vac_tol)
    tv = lambda f: float(np.sum(np.abs(np.diff(f))))  # noqa: E731
    return AuditReport(
        max_p0=float(p.max()),
        P_H=model.P_H,
        pxx_L1=integrate(np.abs(second_difference(p, grid)), grid),
        tv_c1=tv(c1), tv_c2=tv(c2), tv_n1=tv(n1), tv_n2=tv(n2),
        N=grid.N,
    )
