"""Reference solutions: Barenblatt profiles and the uniform-state ODE.

The Barenblatt oracle targets the reaction-free total-density equation
n_t = a (n^m)_xx with m = gamma + 1 and a = gamma / m.  The classical
source-type solution U(s, x) of u_s = (u^m)_xx is evaluated at the dilated
time s = a (t + t0).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import beta as beta_fn

from . import _kernels
from .config import RunConfig
from .errors import DomainError, NumericalFailure
from .fields import SimState
from .grid import Grid
from .model import GrowthModel


@dataclass(frozen=True)
class BarenblattSpec:
    gamma: float
    mass: float = 1.0
    t0: float = 0.05

    def __post_init__(self):
        if not self.gamma > 1:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")
        if not self.mass > 0:
            raise DomainError("mass must be positive")
        if not self.t0 > 0:
            raise DomainError("t0 must be positive")

    @property
    def m(self) -> float:
        return self.gamma + 1.0

    @property
    def alpha(self) -> float:
        return 1.0 / (self.m + 1.0)

    @property
    def k(self) -> float:
        return self.alpha * (self.m - 1.0) / (2.0 * self.m)

    @property
    def C(self) -> float:
        """Constant fixed by the mass."""
        q = 1.0 / (self.m - 1.0)
        B = beta_fn(0.5, q + 1.0)
        return (self.mass * math.sqrt(self.k) / B) ** (1.0 / (q + 0.5))

    def dilated(self, t: float) -> float:
        if t + self.t0 <= 0:
            raise DomainError(f"t + t0 must be positive, got {t + self.t0}")
        return self.gamma / self.m * (t + self.t0)

    def radius(self, t: float) -> float:
        return math.sqrt(self.C / self.k) * self.dilated(t) ** self.alpha


def barenblatt_profile(spec: BarenblattSpec, t: float, x) -> np.ndarray:
    s = spec.dilated(t)
    x = np.asarray(x, dtype=float)
    base = np.maximum(spec.C - spec.k * x**2 * s ** (-2.0 * spec.alpha), 0.0)
    return (s ** (-spec.alpha) * base ** (1.0 / (spec.m - 1.0)))[()]


def barenblatt_cell_averages(spec: BarenblattSpec, t: float, grid: Grid, order: int = 8):
    """Gauss-Legendre cell averages (exact mass up to quadrature error at the edge)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    x = grid.centers[:, None] + 0.5 * grid.dx * nodes[None, :]
    return barenblatt_profile(spec, t, x) @ weights * 0.5


@dataclass(frozen=True)
class OdeTrajectory:
    t: np.ndarray
    n1: np.ndarray
    n2: np.ndarray


def uniform_ode_reference(n1_0: float, n2_0: float, gamma: float, model: GrowthModel,
                          T: float, dt: float = 1e-5, sample_every: float | None = None):
    """RK4 for n1' = n1 F1 + n2 G1, n2' = n1 F2 + n2 G2 with p = (n1 + n2)^gamma."""
    if n1_0 < 0 or n2_0 < 0:
        raise DomainError("initial values must be nonnegative")
    nsteps = int(round(T / dt))
    if nsteps == 0:
        return OdeTrajectory(np.array([0.0]), np.array([n1_0]), np.array([n2_0]))
    dt = T / nsteps
    stride = 1 if sample_every is None else max(1, int(round(sample_every / dt)))
    while nsteps % stride:
        stride -= 1
    cap = 10.0 * model.P_H ** (1.0 / gamma) if model.P_H > 0 else math.inf
    codes, amps, thrs = model.kernel_params()
    out, status = _kernels.rk4_uniform(float(n1_0), float(n2_0), float(gamma),
                                       codes, amps, thrs, dt, nsteps, stride, cap)
    if status >= 0:
        raise NumericalFailure(f"ODE oracle left [-{cap:.3g}, {cap:.3g}] at t = {(status + 1) * dt:.6g}")
    t = np.arange(out.shape[0]) * stride * dt
    return OdeTrajectory(t, out[:, 0].copy(), out[:, 1].copy())


@dataclass(frozen=True)
class ConvergenceResult:
    scheme: str
    Ns: tuple
    errors: tuple
    orders: tuple  # log2(e_N / e_2N) for consecutive pairs
    seconds: float

    @property
    def order(self) -> float:
        return min(self.orders)


def barenblatt_config(N: int, L: float = 3.0, T: float = 0.5, cfl: float = 0.9,
                      dt_max: float = 1e-2, gamma: float = 2.0) -> RunConfig:
    return RunConfig().with_values(**{
        "grid.L": L, "grid.N": N, "time.T": T, "time.cfl": cfl, "time.dt_max": dt_max,
        "time.output_every": 0, "time.output_dt": 0.0, "physics.gamma": gamma, "physics.epsilon": 0.0,
    })


def convergence_study(scheme: str, spec: BarenblattSpec, Ns=(100, 200, 400), T: float = 0.5,
                      L: float = 3.0, dt_max: float = 1e-2,
                      dt_per_dx: float | None = None) -> ConvergenceResult:
    """L1 error against the exact profile at T on successively refined grids.

    The semi-implicit scheme has no parabolic step limit, so its time error
    only shrinks with the grid when dt is tied to dx (``dt_per_dx``).
    """
    from .simulation import run_simulation

    zero = GrowthModel()
    errors = []
    started = time.perf_counter()
    for N in Ns:
        dtm = dt_max if dt_per_dx is None else dt_per_dx * 2.0 * L / N
        cfg = barenblatt_config(N, L=L, T=T, dt_max=dtm, gamma=spec.gamma)
        grid = cfg.make_grid()
        n0 = barenblatt_cell_averages(spec, 0.0, grid)
        state0 = SimState(n0, np.zeros(N), 0.0, spec.gamma, 0.0)
        res = run_simulation(cfg, scheme=scheme, state0=state0, model=zero)
        exact = barenblatt_cell_averages(spec, T, grid)
        errors.append(float(grid.dx * np.sum(np.abs(res.final_state.n - exact))))
    orders = tuple(math.log2(a / b) for a, b in zip(errors, errors[1:]))
    return ConvergenceResult(scheme, tuple(Ns), tuple(errors), orders,
                             time.perf_counter() - started)


def uniform_pde_deviation(n0: float = 0.2, gamma: float = 5.0, T: float = 1.0, N: int = 16,
                          dt_max: float = 1e-4, scheme: str = "explicit") -> float:
    """Max-norm gap between a uniform-state PDE run and the RK4 oracle at T."""
    from .simulation import run_simulation

    model = GrowthModel.tumour_host()
    cfg = RunConfig().with_values(**{
        "grid.N": N, "time.T": T, "time.dt_max": dt_max, "time.output_every": 0, "time.output_dt": 0.0,
        "physics.gamma": gamma, "physics.epsilon": 0.0,
    })
    state0 = SimState(np.full(N, n0), np.full(N, n0), 0.0, gamma, 0.0)
    res = run_simulation(cfg, scheme=scheme, state0=state0, model=model)
    ref = uniform_ode_reference(n0, n0, gamma, model, T)
    return float(max(np.max(np.abs(res.final_state.n1 - ref.n1[-1])),
                     np.max(np.abs(res.final_state.n2 - ref.n2[-1]))))


@dataclass(frozen=True)
class OracleRow:
    case: str
    grid_N: int
    error_L1: float
    observed_order: float
    passed: bool


def run_oracles(case: str = "all", min_order: float = 0.8, ode_tol: float = 1e-4):
    cases = ("barenblatt_explicit", "barenblatt_semi_implicit", "uniform_ode")
    if case != "all" and case not in cases:
        raise ValueError(f"unknown oracle case {case!r}; expected one of {cases} or 'all'")
    rows = []
    spec = BarenblattSpec(gamma=2.0)
    for name in cases:
        if case not in ("all", name):
            continue
        if name.startswith("barenblatt"):
            scheme = name.split("_", 1)[1]
            res = convergence_study(scheme, spec,
                                    dt_per_dx=0.5 if scheme == "semi_implicit" else None)
            ok = res.order >= min_order and all(b < a for a, b in zip(res.errors, res.errors[1:]))
            orders = (math.nan,) + res.orders
            rows += [OracleRow(name, N, e, o, ok) for N, e, o in zip(res.Ns, res.errors, orders)]
        else:
            dev = uniform_pde_deviation()
            rows.append(OracleRow(name, 16, dev, math.nan, dev <= ode_tol))
    return rows
