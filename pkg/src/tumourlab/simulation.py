"""Time loop, cadence and run-level bookkeeping."""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import RunConfig
from .diagnostics import (
    DiagnosticsRecord,
    complementarity_residual,
    pressure_norms,
    energy_and_dissipation,
    estimate_bv,
    estimate_w_pair,
    lower_barrier,
    segregation_indicators,
    write_records,
)
from .errors import InfeasibleModelError, NumericalFailure, SupportError
from .fields import SimState, derive
from .grid import Grid, integrate
from .initial_data import build_initial
from .lagrangian import (
    from_sim_state,
    lagrangian_step,
    segregation_native,
    stable_dt as lagrangian_dt,
    to_sim_state,
)
from .model import GrowthModel, check_feasibility
from .output import emit_plot_script, snapshot_name, write_run_meta, write_snapshot
from .solver import dt_limit, regularise_initial, step

# steps closer than this to a target time are merged into it
_T_EPS = 1e-12


@dataclass
class RunSummary:
    config: RunConfig
    final_state: SimState
    records: list
    steps: int = 0
    wall_seconds: float = 0.0
    mass0: float = 0.0
    source_cum: float = 0.0
    clamp_cum: float = 0.0
    mass_balance_rel: float = 0.0
    max_p_overall: float = 0.0
    min_species: float = 0.0  # raw minimum before clamping, over all steps
    barrier_margin: float = math.inf  # min over steps of min_n - 2 eps exp(-R_inf t)
    residual_window_avg: float = 0.0
    upper_bound_applies: bool = True  # max p(0) <= P_H
    warnings: list = field(default_factory=list)

    @property
    def nonneg_violation(self) -> float:
        return max(0.0, -self.min_species)

    def energy_rate_sup(self) -> float:
        """Sup over record intervals of (E(t2) - E(t1) + D-integral) / (t2 - t1).

        With the default time cadence the intervals all have length
        ``time.output_dt``, which makes the value comparable across schemes.
        """
        best = -math.inf
        for a, b in zip(self.records, self.records[1:]):
            dt = b.t - a.t
            if dt > 0:
                best = max(best, (b.energy - a.energy + b.dissipation_cum - a.dissipation_cum) / dt)
        return best

    def sup(self, name: str) -> float:
        return max(getattr(r, name) for r in self.records)


def feasible_model(cfg: RunConfig) -> tuple[GrowthModel, list[str]]:
    """Model plus warning lines; raises InfeasibleModelError on errors."""
    model = cfg.make_model()
    report = check_feasibility(model)
    if not report.feasible:
        raise InfeasibleModelError("; ".join(f"{v.name}: {v.detail}" for v in report.errors))
    return model, [f"{v.name}: {v.detail}" for v in report.warnings]


def initial_state(cfg: RunConfig, grid: Grid) -> SimState:
    n1, n2 = build_initial(cfg.initial.n1, cfg.initial.n2, grid)
    return regularise_initial(n1, n2, cfg.physics.epsilon, cfg.physics.gamma)


def make_record(state: SimState, grid: Grid, model: GrowthModel, cfg: RunConfig,
                cum: dict, seg=None) -> DiagnosticsRecord:
    tol = cfg.tolerances
    d = derive(state, grid, model, tol.vac_tol, tol.tol_pos)
    bv_n1, bv_n2, bv_c1, bv_c2 = estimate_bv(state.n1, state.n2, d.c1, d.c2, grid)
    _, w_minus = estimate_w_pair(d, grid)
    px, pxx = pressure_norms(d, grid)
    E, _ = energy_and_dissipation(state, d, model, grid, state.gamma)
    if seg is None:
        seg = segregation_indicators(state, d, grid)
    return DiagnosticsRecord(
        t=state.t,
        mass1=integrate(state.n1, grid),
        mass2=integrate(state.n2, grid),
        max_p=float(d.p.max()),
        min_n=float(d.n.min()),
        grad_p_L2_cum=cum["grad"],
        bv_c1=bv_c1, bv_c2=bv_c2, bv_n1=bv_n1, bv_n2=bv_n2,
        gamma_p_absw_cum=cum["absw"],
        w_minus_L1=w_minus,
        px_Linf=px, pxx_L1=pxx,
        energy=E,
        dissipation_cum=cum["diss"],
        comp_residual=complementarity_residual(state, d, model, grid),
        seg_ncc=seg[0], seg_n1n2=seg[1],
        clamp_cum=cum["clamp"],
    )


def run_simulation(cfg: RunConfig, out_dir: str | None = None, scheme: str | None = None,
                   state0: SimState | None = None,
                   model: GrowthModel | None = None) -> RunSummary:
    """Integrate from 0 to T; optionally write the run directory.

    ``state0`` and ``model`` override the configured initial data and growth
    terms (the oracle tests use this); the feasibility check is then skipped.
    """
    started = time.perf_counter()
    grid = cfg.make_grid()
    warnings: list[str] = []
    if model is None:
        model, warnings = feasible_model(cfg)
    sc = cfg.scheme_config(scheme)
    state = state0 if state0 is not None else initial_state(cfg, grid)
    gamma, eps, T = state.gamma, state.epsilon, cfg.time.T
    tol = cfg.tolerances
    r_inf = model.R_inf if model.P_H > 0 else 0.0

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        notes = [f"scheme: {sc.scheme}", "vacuum tie-break: c1 = c2 = 1/2"]
        notes += [f"warning {w}" for w in warnings]
        write_run_meta(os.path.join(out_dir, "run_meta"), cfg, notes)

    mass0 = integrate(state.n, grid)
    p0 = float(np.max(state.n) ** gamma)
    # support check only makes sense for data that start compactly supported
    watch_support = eps == 0 and state.n[0] < tol.vac_tol and state.n[-1] < tol.vac_tol
    codes, amps, thrs = model.kernel_params()

    lagr = sc.scheme == "lagrangian"
    lst = from_sim_state(state, grid) if lagr else None

    cum = {"grad": 0.0, "absw": 0.0, "diss": 0.0, "clamp": 0.0}
    summary = RunSummary(cfg, state, [], mass0=mass0, warnings=warnings,
                         upper_bound_applies=p0 <= model.P_H,
                         max_p_overall=p0, min_species=float(min(state.n1.min(), state.n2.min())))
    if eps > 0:
        summary.barrier_margin = float(state.n.min()) - 2.0 * eps

    snaps = sorted(set(cfg.time.snapshot_times))
    snap_i = 0

    def record(st):
        seg = segregation_native(lst) if lagr else None
        rec = make_record(st, grid, model, cfg, cum, seg)
        summary.records.append(rec)
        summary.max_p_overall = max(summary.max_p_overall, rec.max_p)

    def snapshot(st):
        if out_dir is not None:
            d = derive(st, grid, model, tol.vac_tol, tol.tol_pos)
            write_snapshot(st, d, grid, os.path.join(out_dir, snapshot_name(st.t)))

    record(state)
    while snap_i < len(snaps) and snaps[snap_i] <= 0.0:
        snapshot(state)
        snap_i += 1

    out_every, out_dt = cfg.time.output_every, cfg.time.output_dt
    out_k = 1
    window_lo = 0.5 * T
    window_acc = 0.0
    t = 0.0
    steps = 0
    try:
        while T - t > _T_EPS:
            ints = _kernels.step_integrals(state.n1, state.n2, grid.dx, gamma,
                                           codes, amps, thrs, tol.vac_tol)
            if lagr:
                dt = lagrangian_dt(lst, sc, r_inf)
            else:
                dt = dt_limit(ints[0], ints[1], gamma, grid.dx, sc, r_inf)
            target = T
            if snap_i < len(snaps):
                target = min(target, snaps[snap_i])
            if out_dt > 0:
                target = min(target, out_k * out_dt)
            if target - t <= dt * (1 + 1e-9):
                dt = target - t
            if lagr:
                lst, rep = lagrangian_step(lst, model, sc, dt)
                dt = rep.dt_used
                new = to_sim_state(lst, grid)
            else:
                new, rep = step(state, grid, model, sc, dt)
            # left-endpoint accumulation
            cum["grad"] += dt * float(ints[3])
            cum["absw"] += dt * gamma * float(ints[4])
            cum["diss"] += dt * gamma * float(ints[5])
            cum["clamp"] += rep.clamped_mass
            summary.source_cum += rep.source_mass
            overlap = (t + dt) - max(t, window_lo)
            if overlap > 0:
                window_acc += float(ints[6]) * overlap
            t = target if abs(target - (t + dt)) <= _T_EPS else t + dt
            state = SimState(new.n1, new.n2, t, gamma, eps)
            steps += 1

            summary.max_p_overall = max(summary.max_p_overall, rep.max_p)
            summary.min_species = min(summary.min_species, rep.min_n)
            if eps > 0:
                margin = float(state.n.min()) - lower_barrier(eps, model.R_inf, t)
                summary.barrier_margin = min(summary.barrier_margin, margin)
            if cum["clamp"] > tol.clamp_limit * mass0:
                raise NumericalFailure(
                    f"clamped mass {cum['clamp']:.3e} exceeds {tol.clamp_limit:g} x initial mass"
                )
            if watch_support and not lagr:
                if state.n[0] >= tol.vac_tol or state.n[-1] >= tol.vac_tol:
                    raise SupportError(
                        f"density reached the boundary cells at t = {t:.6g}; increase grid.L"
                    )

            at_snap = snap_i < len(snaps) and t >= snaps[snap_i]
            at_out = out_dt > 0 and t >= out_k * out_dt
            by_steps = out_every > 0 and steps % out_every == 0
            if by_steps or at_snap or at_out or T - t <= _T_EPS:
                record(state)
            while out_dt > 0 and out_k * out_dt <= t:
                out_k += 1
            while snap_i < len(snaps) and t >= snaps[snap_i]:
                snapshot(state)
                snap_i += 1
    finally:
        summary.final_state = state
        summary.steps = steps
        summary.clamp_cum = cum["clamp"]
        if out_dir is not None:
            write_records(os.path.join(out_dir, "diagnostics.csv"), summary.records)

    mass_T = integrate(state.n, grid)
    denom = mass0 if mass0 > 0 else 1.0
    summary.mass_balance_rel = abs(mass_T - mass0 - summary.source_cum - cum["clamp"]) / denom
    if T > 0:
        summary.residual_window_avg = window_acc / (T - window_lo)
    else:
        summary.residual_window_avg = summary.records[0].comp_residual
    summary.wall_seconds = time.perf_counter() - started
    if out_dir is not None and cfg.outputs.emit_plots:
        emit_plot_script(out_dir, snaps)
    return summary
