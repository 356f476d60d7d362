"""Cross-check the two formulations on small geometries.

For each (n, m, rho0, rho1) both models are solved; the table lists the two
objectives, their relative difference and the independently verified
contrast violation.
"""

import argparse
import time

from ffopt.lp_solver import solve, verify_mask_solution
from ffopt.mask_lp import MaskProblem, build_model

GEOMETRIES = [(10, 6, 2.0, 6.0), (20, 8, 2.0, 8.0), (30, 10, 3.0, 10.0), (40, 12, 4.0, 12.0)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--contrast", type=float, default=1e-5)
    args = ap.parse_args()
    print(f"{'n':>3} {'m':>3} {'rho0':>5} {'rho1':>5} {'onestep':>14} {'twostep':>14} {'rel diff':>9} "
          f"{'violation':>10} {'binary':>7} {'sec':>5}")
    for n, m, r0, r1 in GEOMETRIES:
        p = MaskProblem(n, m, rho0=r0, rho1=r1, contrast=args.contrast)
        t0 = time.perf_counter()
        a, b = (solve(build_model(p, f)) for f in ("onestep", "twostep"))
        rep = verify_mask_solution(p, b)
        rel = abs(a.primal_objective - b.primal_objective) / abs(a.primal_objective)
        print(f"{n:>3} {m:>3} {r0:>5} {r1:>5} {a.primal_objective:>14.10f} {b.primal_objective:>14.10f} "
              f"{rel:>9.1e} {rep.max_contrast_violation / rep.fhat00:>10.1e} {rep.binary_fraction:>7.3f} "
              f"{time.perf_counter() - t0:>5.1f}")


if __name__ == "__main__":
    main()
