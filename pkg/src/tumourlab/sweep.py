"""Incompressible-limit sweep over gamma and the segregation study."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from .config import RunConfig
from .diagnostics import fmt, segregation_indicators
from .errors import ConfigError, InsufficientRowsError, TumourLabError
from .fields import derive
from .simulation import RunSummary, initial_state, run_simulation


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    epsilon: float
    scheme: str
    comp_residual_timeavg: float
    gamma_scaled_residual: float
    sup_w_minus: float
    grad_p_L2_cum_T: float
    bv_sup: float
    gamma_p_absw_cum_T: float
    seg_ncc_max: float
    max_p_overall: float
    energy_rate_sup: float
    runtime_seconds: float
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRow))


def row_from_summary(s: RunSummary, scheme: str) -> SweepRow:
    cfg = s.config
    res = s.residual_window_avg
    last = s.records[-1]
    return SweepRow(
        gamma=cfg.physics.gamma,
        epsilon=cfg.physics.epsilon,
        scheme=scheme,
        comp_residual_timeavg=res,
        gamma_scaled_residual=cfg.physics.gamma * res,
        sup_w_minus=s.sup("w_minus_L1"),
        grad_p_L2_cum_T=last.grad_p_L2_cum,
        bv_sup=max(r.bv_total for r in s.records),
        gamma_p_absw_cum_T=last.gamma_p_absw_cum,
        seg_ncc_max=s.sup("seg_ncc"),
        max_p_overall=s.max_p_overall,
        energy_rate_sup=s.energy_rate_sup(),
        runtime_seconds=s.wall_seconds,
    )


def scheme_for(cfg: RunConfig, gamma: float) -> str:
    return "semi_implicit" if gamma >= cfg.sweep.implicit_from_gamma else "explicit"


def _run_row(args) -> SweepRow:
    cfg, gamma, eps, out_dir = args
    scheme = scheme_for(cfg, gamma)
    try:
        changes = {"physics.gamma": gamma, "physics.epsilon": eps, "physics.scheme": scheme}
        if scheme == "semi_implicit":
            changes["time.dt_max"] = min(cfg.time.dt_max, cfg.sweep.implicit_dt_max)
        c = cfg.with_values(**changes)
        sub = None
        if out_dir is not None:
            sub = os.path.join(out_dir, f"gamma{gamma:g}_eps{eps:g}")
        return row_from_summary(run_simulation(c, sub), scheme)
    except TumourLabError as exc:
        nan = math.nan
        return SweepRow(gamma, eps, scheme, *([nan] * 10), status=f"failed: {exc}")


def run_gamma_sweep(cfg: RunConfig, gammas=None, epsilons=None, workers: int | None = None,
                    out_dir: str | None = None) -> list[SweepRow]:
    """One row per (gamma, epsilon); rows are independent and may run in parallel."""
    gammas = tuple(cfg.sweep.gammas if gammas is None else gammas)
    epsilons = tuple(cfg.sweep.epsilons if epsilons is None else epsilons)
    if any(g <= 1 for g in gammas) or any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise ConfigError("gammas must exceed 1 and be strictly increasing")
    workers = workers or cfg.sweep.workers
    jobs = [(cfg, g, e, out_dir) for e in epsilons for g in gammas]
    if workers == 1 or len(jobs) == 1:
        rows = [_run_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_row, jobs))
    if out_dir is not None:
        write_sweep(os.path.join(out_dir, "sweep.csv"), rows)
    return rows


def write_sweep(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in astuple(r)])


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    value: float
    threshold: float
    note: str = ""

    def line(self) -> str:
        return f"{self.name}, {'PASS' if self.passed else 'FAIL'}, {fmt(self.value)}, {fmt(self.threshold)}"


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def decay_report(rows, slope_max: float = -0.7, noise: float = 0.05,
                 factor: float = 5.0) -> list[Verdict]:
    """Decay and boundedness verdicts for the successful rows of one epsilon."""
    good = sorted((r for r in rows if r.ok), key=lambda r: r.gamma)
    if len({r.epsilon for r in good}) > 1:
        raise ValueError("decay_report expects rows of a single epsilon")
    if len(good) < 2:
        raise InsufficientRowsError(f"need at least 2 successful rows, got {len(good)}")
    g = np.array([r.gamma for r in good])
    res = np.array([r.comp_residual_timeavg for r in good])
    out = []

    ratios = res[1:] / res[:-1]
    worst = float(ratios.max())
    out.append(Verdict("residual_monotone", worst <= 1.0 + noise, worst, 1.0 + noise,
                       "largest ratio of consecutive time-averaged residuals"))
    if np.all(res > 0):
        slope = loglog_slope(g, res)
    else:
        slope = -math.inf if np.all(res[1:] == 0) else math.nan
    out.append(Verdict("residual_slope", bool(slope <= slope_max), slope, slope_max,
                       "least-squares slope of log(residual) against log(gamma)"))
    scaled = g * res
    spread = float(scaled.max() / scaled.min()) if scaled.min() > 0 else math.inf
    out.append(Verdict("gamma_scaled_spread", spread < factor, spread, factor,
                       "max/min of gamma times residual"))

    ref = good[0]
    for name in ("grad_p_L2_cum_T", "bv_sup", "sup_w_minus", "gamma_p_absw_cum_T",
                 "energy_rate_sup"):
        vals = np.array([getattr(r, name) for r in good])
        base = abs(getattr(ref, name))
        top = float(vals.max())
        if base > 0:
            ratio = top / base
        else:
            ratio = 0.0 if top <= 0 else math.inf
        out.append(Verdict(f"bounded_{name}", bool(np.all(np.isfinite(vals)) and ratio <= factor),
                           ratio, factor, f"max over sweep / |value at gamma = {ref.gamma:g}|"))
    return out


def write_verdicts(path, verdicts, header=()) -> None:
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for v in verdicts:
            fh.write(v.line() + "\n")


@dataclass(frozen=True)
class SegregationResult:
    passed: bool
    seg_ncc_max: float
    seg_n1n2_max: float
    threshold: float
    summary: RunSummary

    @property
    def curve(self):
        return [(r.t, r.seg_ncc, r.seg_n1n2) for r in self.summary.records]


def segregation_study(cfg: RunConfig, out_dir: str | None = None, scheme: str | None = None,
                      allow_cross_reactions: bool = False) -> SegregationResult:
    """Run segregated data without cross reactions and test that they stay apart.

    Nonzero cross terms are a config error unless ``allow_cross_reactions``,
    in which case the run proceeds and the verdict is expected to fail.
    """
    model = cfg.make_model()
    if model.has_cross_terms and not allow_cross_reactions:
        raise ConfigError("segregation study needs model.F2 = zero and model.G1 = zero")
    grid = cfg.make_grid()
    s0 = initial_state(cfg, grid)
    tol = cfg.tolerances
    seg0 = segregation_indicators(s0, derive(s0, grid, model, tol.vac_tol, tol.tol_pos), grid)
    if max(seg0) > 0:
        raise ConfigError("segregation study needs initially disjoint species supports")
    summary = run_simulation(cfg, out_dir, scheme=scheme)
    threshold = tol.seg_tol * summary.mass0
    ncc = summary.sup("seg_ncc")
    n1n2 = summary.sup("seg_n1n2")
    passed = ncc <= threshold and n1n2 <= threshold
    if out_dir is not None:
        write_verdicts(os.path.join(out_dir, "verdicts.txt"), [
            Verdict("segregation_ncc", ncc <= threshold, ncc, threshold),
            Verdict("segregation_n1n2", n1n2 <= threshold, n1n2, threshold),
        ], header=[f"threshold = seg_tol x initial mass = {tol.seg_tol:g} x {summary.mass0:.17g}"])
    return SegregationResult(passed, ncc, n1n2, threshold, summary)
