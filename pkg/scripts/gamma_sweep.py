"""Full gamma sweep with verdicts, written under the given directory.

    python scripts/gamma_sweep.py [--config configs/tumour_host.cfg] [--out out/sweep]

Same as ``tumourlab sweep``; kept as a script so the reference numbers in
the README can be regenerated with timing per row.
"""
import argparse
import os
import time

from tumourlab.config import load_config
from tumourlab.sweep import decay_report, run_gamma_sweep, write_verdicts


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", default="configs/tumour_host.cfg")
    ap.add_argument("--out", default="out/sweep")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    started = time.perf_counter()
    rows = run_gamma_sweep(cfg, workers=args.workers, out_dir=args.out)
    for r in rows:
        print(f"gamma {r.gamma:>4g} {r.scheme:<13} residual {r.comp_residual_timeavg:.4g} "
              f"energy rate {r.energy_rate_sup:.3g} ({r.runtime_seconds:.1f} s) {r.status}")
    sw = cfg.sweep
    verdicts = decay_report(rows, sw.slope_max, sw.noise, sw.factor)
    write_verdicts(os.path.join(args.out, "verdicts.txt"), verdicts)
    for v in verdicts:
        print(v.line())
    print(f"total {time.perf_counter() - started:.0f} s")


if __name__ == "__main__":
    main()
