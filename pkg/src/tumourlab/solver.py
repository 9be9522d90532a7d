"""Time stepping for the two-species system on the Eulerian grid.

Two interchangeable schemes:

* ``explicit``: conservative first-order upwind transport of each species
  with explicit Euler reactions.  Reference scheme, valid at any gamma but
  with a parabolic time-step restriction dt ~ dx^2 / (gamma * p).
* ``semi_implicit``: the total density solves the porous-medium form
  n_t - gamma/(gamma+1) (n^(gamma+1))_xx = n R implicitly (damped Newton on
  a tridiagonal Jacobian); fractions are then transported upwind and the
  species rebuilt as c_i * n.  Only advective and reaction limits apply.

The mass-coordinate scheme lives in ``tumourlab.lagrangian``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels
from .errors import ConfigError, DomainError, NewtonDivergence, NumericalFailure
from .fields import (
    TOL_POS,
    VAC_TOL,
    DerivedFields,
    SimState,
    face_velocity,
    fraction_sources,
    fractions,
)
from .grid import Grid, second_difference
from .model import GrowthModel, eval_rates

SCHEMES = ("explicit", "semi_implicit", "lagrangian")


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "explicit"
    cfl: float = 0.9
    dt_max: float = 1e-2
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    vac_tol: float = VAC_TOL
    tol_pos: float = TOL_POS

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.newton_tol > 0:
            raise ConfigError("newton_tol must be positive")
        if not self.dt_max > 0:
            raise ConfigError("dt_max must be positive")


@dataclass(frozen=True)
class StepReport:
    dt_used: float
    clamped_mass: float = 0.0
    newton_iters: int = 0
    max_p: float = 0.0
    min_n: float = 0.0  # smallest species value before clamping
    source_mass: float = 0.0  # dt * integral of n1 F + n2 G at the old state


def regularise_initial(n1_init, n2_init, epsilon: float, gamma: float) -> SimState:
    """Shift both species by epsilon everywhere; time starts at 0."""
    n1 = np.asarray(n1_init, dtype=float)
    n2 = np.asarray(n2_init, dtype=float)
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    if np.any(n1 < 0) or np.any(n2 < 0):
        raise DomainError("initial densities must be nonnegative")
    return SimState(n1 + epsilon, n2 + epsilon, 0.0, float(gamma), float(epsilon))


def dt_limit(max_p: float, max_u: float, gamma: float, dx: float,
             config: SchemeConfig, r_inf: float = 0.0) -> float:
    """Stable step from the extreme pressure and velocity of a state."""
    dt = config.dt_max
    if config.scheme == "explicit":
        denom = 2.0 * gamma * max_p + 2.0 * dx * max_u
        if denom > 0:
            dt = min(dt, config.cfl * dx * dx / denom)
    else:
        if max_u > 0:
            dt = min(dt, config.cfl * dx / max_u)
    if r_inf > 0:
        dt = min(dt, config.cfl / r_inf)
    return dt


def stable_dt(state: SimState, derived: DerivedFields, grid: Grid,
              config: SchemeConfig, r_inf: float = 0.0) -> float:
    max_p = float(np.max(derived.p)) if derived.p.size else 0.0
    max_u = float(np.max(np.abs(derived.u))) if derived.u.size else 0.0
    return dt_limit(max_p, max_u, state.gamma, grid.dx, config, r_inf)


def _clamp(values: np.ndarray, dx: float, tol_pos: float, label: str):
    lo = float(values.min())
    if not np.all(np.isfinite(values)):
        raise NumericalFailure(f"non-finite {label}")
    if lo >= 0.0:
        return values, 0.0, lo
    if lo < -tol_pos:
        raise NumericalFailure(f"{label} fell to {lo:.3e}, beyond -{tol_pos:g}")
    neg = values < 0.0
    clamped = float(-values[neg].sum() * dx)
    values = np.where(neg, 0.0, values)
    return values, clamped, lo


def explicit_step(state: SimState, grid: Grid, model: GrowthModel,
                  config: SchemeConfig, dt: float):
    codes, amps, thrs = model.kernel_params()
    n1, n2, source = _kernels.explicit_update(
        np.ascontiguousarray(state.n1, dtype=float),
        np.ascontiguousarray(state.n2, dtype=float),
        grid.dx, dt, state.gamma, codes, amps, thrs,
    )
    n1, c1, lo1 = _clamp(n1, grid.dx, config.tol_pos, "n1")
    n2, c2, lo2 = _clamp(n2, grid.dx, config.tol_pos, "n2")
    new = replace(state, n1=n1, n2=n2, t=state.t + dt)
    n = n1 + n2
    report = StepReport(
        dt_used=dt,
        clamped_mass=c1 + c2,
        max_p=float(np.max(n) ** state.gamma),
        min_n=min(lo1, lo2),
        source_mass=dt * source,
    )
    return new, report


def _pme_residual(y, rhs, kappa, m, grid):
    return y - kappa * second_difference(y**m, grid) - rhs


def solve_pme_implicit(n, rhs, gamma: float, dt: float, grid: Grid,
                       tol: float = 1e-10, max_iter: int = 50):
    """Solve y - dt*a*D2(y^m) = rhs with m = gamma + 1, a = gamma / m.

    Damped Newton from y = n: the step is halved (up to 30 times) until the
    max-norm residual decreases and y stays nonnegative.  Returns
    (y, iterations).
    """
    m = gamma + 1.0
    kappa = dt * gamma / m
    inv = kappa / grid.dx**2
    N = n.size
    y = np.array(n, dtype=float)
    r = _pme_residual(y, rhs, kappa, m, grid)
    rn = float(np.max(np.abs(r)))
    it = 0
    ab = np.empty((3, N))
    while rn > tol:
        if it >= max_iter:
            raise NewtonDivergence(
                f"Newton residual {rn:.3e} > {tol:g} after {max_iter} iterations"
            )
        d = inv * m * y ** (m - 1.0)
        ab[0, 0] = 0.0
        ab[0, 1:] = -d[1:]
        ab[2, -1] = 0.0
        ab[2, :-1] = -d[:-1]
        ab[1, :] = 1.0 + 2.0 * d
        ab[1, 0] = 1.0 + d[0]
        ab[1, -1] = 1.0 + d[-1]
        delta = solve_banded((1, 1), ab, -r, check_finite=False)
        s = 1.0
        for _ in range(31):
            trial = y + s * delta
            if trial.min() >= 0.0:
                r_trial = _pme_residual(trial, rhs, kappa, m, grid)
                rn_trial = float(np.max(np.abs(r_trial)))
                if rn_trial < rn:
                    break
            s *= 0.5
        else:
            raise NewtonDivergence(f"line search failed at residual {rn:.3e}")
        y, r, rn = trial, r_trial, rn_trial
        it += 1
    return y, it


def transport_fractions(c, y, u, dt: float, dx: float) -> np.ndarray:
    """Upwind transport of a fraction by the face velocity u.

    Each cell keeps its resident mass y_j at composition c_j and receives
    the upwind inflow lam*|u|*y from each inflow face at the donor's
    composition; the new value is the mass-weighted average, so it always
    stays within the range of its neighbours.
    """
    lam = dt / dx
    inflow_l = lam * np.maximum(u[:-1], 0.0)
    inflow_r = lam * np.maximum(-u[1:], 0.0)
    a_l = np.zeros_like(y)
    a_r = np.zeros_like(y)
    a_l[1:] = inflow_l[1:] * y[:-1]
    a_r[:-1] = inflow_r[:-1] * y[1:]
    c_l = np.concatenate(([c[0]], c[:-1]))
    c_r = np.concatenate((c[1:], [c[-1]]))
    total = y + a_l + a_r
    safe = np.where(total > 0, total, 1.0)
    mixed = (y * c + a_l * c_l + a_r * c_r) / safe
    return np.where(total > 0, mixed, c)


def semi_implicit_step(state: SimState, grid: Grid, model: GrowthModel,
                       config: SchemeConfig, dt: float):
    n1, n2 = state.n1, state.n2
    n = n1 + n2
    p = np.maximum(n, 0.0) ** state.gamma
    c1, c2 = fractions(n1, n2, config.vac_tol)
    r = eval_rates(model, p)
    source = n1 * r.F + n2 * r.G
    rhs = n + dt * source
    y, iters = solve_pme_implicit(
        n, rhs, state.gamma, dt, grid, config.newton_tol, config.newton_max_iter
    )
    if not np.all(np.isfinite(y)):
        raise NumericalFailure("non-finite total density in semi-implicit step")

    u_new = face_velocity(y**state.gamma, grid)
    s1, s2 = fraction_sources(c1, c2, p, model)
    c1_new = transport_fractions(c1, y, u_new, dt, grid.dx) + dt * s1
    c2_new = transport_fractions(c2, y, u_new, dt, grid.dx) + dt * s2
    lo = float(min((c1_new * y).min(), (c2_new * y).min()))
    c1_new = np.clip(c1_new, 0.0, 1.0)
    c2_new = np.clip(c2_new, 0.0, 1.0)
    total = c1_new + c2_new
    both_zero = total <= 0
    total = np.where(both_zero, 1.0, total)
    c1_new = np.where(both_zero, 0.5, c1_new / total)
    c2_new = np.where(both_zero, 0.5, c2_new / total)

    new = replace(state, n1=c1_new * y, n2=c2_new * y, t=state.t + dt)
    report = StepReport(
        dt_used=dt,
        newton_iters=iters,
        max_p=float(np.max(y) ** state.gamma),
        min_n=lo,
        source_mass=dt * float(grid.dx * np.sum(source)),
    )
    return new, report


def step(state: SimState, grid: Grid, model: GrowthModel, config: SchemeConfig, dt: float):
    if config.scheme == "explicit":
        return explicit_step(state, grid, model, config, dt)
    if config.scheme == "semi_implicit":
        return semi_implicit_step(state, grid, model, config, dt)
    raise ConfigError(f"scheme {config.scheme!r} does not step on the Eulerian grid")

