"""Barenblatt convergence for both schemes and the uniform-state ODE match.

    python scripts/oracle_table.py

Prints errors and observed orders; ``tumourlab oracle`` writes the same
rows to oracle.csv.
"""
from tumourlab.oracles import run_oracles


def main():
    for r in run_oracles("all"):
        print(f"{r.case:<26} N={r.grid_N:<4} error {r.error_L1:.4e} "
              f"order {r.observed_order:.3f} {'PASS' if r.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
