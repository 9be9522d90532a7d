"""Command-line entry point.

    tumourlab run <config> [--out DIR] [--scheme S]
    tumourlab sweep <config> [--gammas 5,10,20,40,80] [--epsilons 0.01] [--workers K]
    tumourlab segregation <config> [--allow-cross-reactions]
    tumourlab oracle [--case all]
    tumourlab validate <config>

Exit codes: 0 success, 1 config error, 2 infeasible model, 3 numerical
failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

from .config import load_config
from .diagnostics import fmt
from .errors import (
    ConfigError,
    DomainError,
    InfeasibleModelError,
    InsufficientRowsError,
    NumericalFailure,
)
from .initial_data import audit_well_prepared, build_initial
from .model import check_feasibility
from .output import emit_plot_script, write_snapshot  # noqa: F401  (re-exported)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_IO = range(5)


def _floats(text: str):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _out_dir(args, cfg, default_sub: str = "") -> str:
    if args.out:
        return args.out
    return os.path.join(cfg.outputs.directory, default_sub) if default_sub else cfg.outputs.directory


def cmd_run(args) -> int:
    from .simulation import run_simulation

    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    s = run_simulation(cfg, out, scheme=args.scheme)
    last = s.records[-1]
    print(f"t = {last.t:g} after {s.steps} steps ({s.wall_seconds:.1f} s)")
    print(f"max p = {s.max_p_overall:.6g} (P_H = {cfg.make_model().P_H:g})")
    print(f"mass balance residual = {s.mass_balance_rel:.3e} (relative)")
    print(f"complementarity residual, [T/2, T] average = {s.residual_window_avg:.6g}")
    for w in s.warnings:
        print(f"warning: {w}")
    print(f"outputs in {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .sweep import decay_report, run_gamma_sweep, write_verdicts

    cfg = load_config(args.config)
    out = _out_dir(args, cfg, "sweep")
    os.makedirs(out, exist_ok=True)
    rows = run_gamma_sweep(cfg, args.gammas, args.epsilons, args.workers, out)
    sw = cfg.sweep
    verdicts, header = [], [
        f"slope threshold {sw.slope_max:g}, monotone noise {sw.noise:g}, boundedness factor {sw.factor:g}",
        "boundedness ratios compare the sweep maximum with the smallest-gamma row",
    ]
    for eps in sorted({r.epsilon for r in rows}):
        sub = [r for r in rows if r.epsilon == eps]
        for r in sub:
            flag = "" if r.ok else f"  [{r.status}]"
            print(f"gamma {r.gamma:g} eps {eps:g}: residual {r.comp_residual_timeavg:.4g}{flag}")
        try:
            vs = decay_report(sub, sw.slope_max, sw.noise, sw.factor)
        except InsufficientRowsError as exc:
            header.append(f"eps = {eps:g}: {exc}")
            continue
        for v in vs:
            v = type(v)(f"{v.name}@eps={eps:g}", v.passed, v.value, v.threshold, v.note)
            verdicts.append(v)
            print(v.line())
    write_verdicts(os.path.join(out, "verdicts.txt"), verdicts, header)
    if not verdicts:
        raise NumericalFailure("no epsilon had enough successful rows for a verdict")
    return EXIT_OK


def cmd_segregation(args) -> int:
    from .sweep import segregation_study

    cfg = load_config(args.config)
    out = _out_dir(args, cfg, "segregation")
    res = segregation_study(cfg, out, scheme=args.scheme,
                            allow_cross_reactions=args.allow_cross_reactions)
    print(f"max seg_ncc = {res.seg_ncc_max:.3e}, max seg_n1n2 = {res.seg_n1n2_max:.3e}, "
          f"threshold = {res.threshold:.3e}: {'PASS' if res.passed else 'FAIL'}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracles import run_oracles

    try:
        rows = run_oracles(args.case)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = args.out or "out"
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "oracle.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("case", "grid_N", "error_L1", "observed_order", "pass"))
        for r in rows:
            w.writerow((r.case, r.grid_N, fmt(r.error_L1), fmt(r.observed_order),
                        "true" if r.passed else "false"))
            print(f"{r.case} N={r.grid_N}: error {r.error_L1:.4e} order {r.observed_order:.3f} "
                  f"{'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    model = cfg.make_model()
    report = check_feasibility(model)
    for line in report.lines():
        print(line)
    if not report.feasible:
        raise InfeasibleModelError("growth terms are not feasible")
    grid = cfg.make_grid()
    n1, n2 = build_initial(cfg.initial.n1, cfg.initial.n2, grid)
    audit = audit_well_prepared(n1, n2, cfg.physics.gamma, cfg.physics.epsilon, model, grid,
                                cfg.tolerances.vac_tol)
    for line in audit.lines():
        print(f"initial data: {line}")
    print("config OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tumourlab", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single simulation")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--scheme", choices=("explicit", "semi_implicit", "lagrangian"))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="gamma sweep with decay verdicts")
    p.add_argument("config")
    p.add_argument("--gammas", type=_floats)
    p.add_argument("--epsilons", type=_floats)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("segregation", help="segregation study")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--scheme", choices=("explicit", "semi_implicit", "lagrangian"))
    p.add_argument("--allow-cross-reactions", action="store_true",
                   help="run even with nonzero F2/G1 (the verdict is then expected to fail)")
    p.set_defaults(func=cmd_segregation)

    p = sub.add_parser("oracle", help="scheme validation against exact solutions")
    p.add_argument("--case", default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("validate", help="parse config, check feasibility, audit initial data")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleModelError as exc:
        print(f"infeasible model: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
