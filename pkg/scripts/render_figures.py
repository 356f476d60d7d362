"""Solve a mask LP and write mask and PSF images (log and linear stretch) as PGM.

Defaults to a desk-size problem; pass --n 150 --m 35 --rho0 4 --rho1 20 for
the full-size design (several minutes).
"""

import argparse
import os

from ffopt.lp_solver import solve
from ffopt.lp_solver.verify import pupil_image
from ffopt.mask_lp import MaskProblem, build_model
from ffopt.render import linear_stretch, log_stretch, mask_image, orient, pgm_bytes, psf_field


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--m", type=int, default=12)
    ap.add_argument("--rho0", type=float, default=4.0)
    ap.add_argument("--rho1", type=float, default=12.0)
    ap.add_argument("--formulation", choices=("onestep", "twostep"), default="twostep")
    ap.add_argument("--size", type=int, default=201)
    ap.add_argument("--out", default="results/figures")
    args = ap.parse_args()

    p = MaskProblem(args.n, args.m, rho0=args.rho0, rho1=args.rho1)
    sol = solve(build_model(p, args.formulation))
    print(f"{sol.status} objective {sol.primal_objective:.8f}")
    F = pupil_image(p, sol)
    img = orient(psf_field(p, F, args.size)[0])
    os.makedirs(args.out, exist_ok=True)
    for name, arr in {"mask.pgm": mask_image(F), "psf_log.pgm": log_stretch(img),
                      "psf_linear.pgm": linear_stretch(img)}.items():
        with open(os.path.join(args.out, name), "wb") as fh:
            fh.write(pgm_bytes(arr))
        print(os.path.join(args.out, name))


if __name__ == "__main__":
    main()
